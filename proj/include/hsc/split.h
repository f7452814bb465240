// hsc/split.h
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

#ifndef HSC_SPLIT_H_
#define HSC_SPLIT_H_

#include <cstdint>
#include <utility>
#include <vector>

#include "hsc/labels.h"

namespace hsc {

struct SplitSpec {
  double train_fraction = 0.8;  // strictly in (0, 1)
  std::uint64_t seed = 42;
  int fold_count = 5;
};

// Disjoint, exhaustive partition with |train| = round(train_fraction * n),
// stratified by class so both sides keep the corpus label ratio.  Ids are
// sorted before the seeded shuffle, so the result depends only on the set of
// ids, never on input order.  Throws ConfigError when either side of the
// partition would be empty.
std::pair<LabelTable, LabelTable> split_train_eval(const LabelTable& table,
                                                   const SplitSpec& spec);

// fold_count-way class-stratified partition under the same seeded shuffle;
// fold sizes differ by at most one, and so does each class's share of a
// fold.  Used for cumulative training-size sweeps.
std::vector<LabelTable> split_folds(const LabelTable& table,
                                    const SplitSpec& spec);

}  // namespace hsc

#endif  // HSC_SPLIT_H_
