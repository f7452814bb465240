// src/split.cc
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hsc/split.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "hsc/error.h"
#include "hsc/rng.h"

namespace hsc {

namespace {

// Ids of each class, sorted and then shuffled under a single seeded stream
// (normal first, then abnormal).  Sorting first makes the result a function
// of the id set alone, independent of map insertion order.
std::pair<std::vector<std::string>, std::vector<std::string>> shuffled_classes(
    const LabelTable& table, std::uint64_t seed) {
  std::vector<std::string> normal, abnormal;
  for (const auto& [id, entry] : table.entries) {
    (entry.label == Label::kNormal ? normal : abnormal).push_back(id);
  }
  std::sort(normal.begin(), normal.end());
  std::sort(abnormal.begin(), abnormal.end());
  Rng rng(seed);
  rng.shuffle(normal);
  rng.shuffle(abnormal);
  return {std::move(normal), std::move(abnormal)};
}

}  // namespace

std::pair<LabelTable, LabelTable> split_train_eval(const LabelTable& table,
                                                   const SplitSpec& spec) {
  if (table.size() == 0) throw InvalidInputError("split: empty label table");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("split: train_fraction must be in (0, 1)");
  }
  const auto n = static_cast<long long>(table.size());
  const long long n_train =
      std::llround(spec.train_fraction * static_cast<double>(n));
  if (n_train <= 0 || n_train >= n) {
    throw ConfigError("split: fraction " + std::to_string(spec.train_fraction) +
                      " leaves an empty partition for " + std::to_string(n) +
                      " records");
  }

  auto [normal, abnormal] = shuffled_classes(table, spec.seed);

  // Largest-remainder quota per class keeps both sides of the partition at
  // the corpus class ratio while the totals stay exactly n_train and
  // n - n_train.
  const double exact_n = spec.train_fraction * static_cast<double>(normal.size());
  const double exact_a =
      spec.train_fraction * static_cast<double>(abnormal.size());
  long long take_n = static_cast<long long>(std::floor(exact_n));
  long long take_a = static_cast<long long>(std::floor(exact_a));
  long long leftover = n_train - take_n - take_a;
  while (leftover > 0) {
    const double rem_n = exact_n - static_cast<double>(take_n);
    const double rem_a = exact_a - static_cast<double>(take_a);
    const bool to_normal =
        rem_n > rem_a || (rem_n == rem_a && normal.size() >= abnormal.size());
    (to_normal ? take_n : take_a) += 1;
    --leftover;
  }

  LabelTable train, eval;
  auto deal = [&](const std::vector<std::string>& ids, long long take) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      (static_cast<long long>(i) < take ? train : eval)
          .entries.emplace(ids[i], table.entries.at(ids[i]));
    }
  };
  deal(normal, take_n);
  deal(abnormal, take_a);
  return {train, eval};
}

std::vector<LabelTable> split_folds(const LabelTable& table,
                                    const SplitSpec& spec) {
  if (table.size() == 0) throw InvalidInputError("split: empty label table");
  if (spec.fold_count < 1) throw ConfigError("split: fold_count must be >= 1");
  const auto n = table.size();
  if (static_cast<std::size_t>(spec.fold_count) > n) {
    throw ConfigError("split: more folds than records");
  }

  auto [normal, abnormal] = shuffled_classes(table, spec.seed);

  // One round-robin pass over the class-grouped sequence: fold sizes differ
  // by at most one overall, and each class's count per fold does too.
  std::vector<LabelTable> folds(static_cast<std::size_t>(spec.fold_count));
  std::size_t pos = 0;
  auto deal = [&](const std::vector<std::string>& ids) {
    for (const auto& id : ids) {
      folds[pos % folds.size()].entries.emplace(id, table.entries.at(id));
      ++pos;
    }
  };
  deal(normal);
  deal(abnormal);
  return folds;
}

}  // namespace hsc
