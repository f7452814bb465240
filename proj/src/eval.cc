// src/eval.cc
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

#include "hsc/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hsc/error.h"

namespace hsc {

namespace {

// Weighted mean of num/den rates, dropping zero-denominator partitions and
// renormalizing the surviving weights.  Both partitions empty leaves the
// metric undefined.
double weighted_rate(const double num[2], const double den[2],
                     const double weight[2], const char* metric) {
  double rate = 0.0;
  double weight_sum = 0.0;
  for (int i = 0; i < 2; ++i) {
    if (den[i] > 0.0) {
      rate += weight[i] * (num[i] / den[i]);
      weight_sum += weight[i];
    }
  }
  if (weight_sum <= 0.0) {
    throw UndefinedMetricError(std::string(metric) +
                               " undefined: no records of that class");
  }
  return rate / weight_sum;
}

void check_missing(const std::vector<std::string>& missing, const char* who) {
  if (missing.empty()) return;
  std::string msg = std::string(who) + ": ids missing from the reference:";
  for (const auto& id : missing) msg += " " + id;
  throw InvalidInputError(msg);
}

}  // namespace

void EvalWeights::validate() const {
  const double values[] = {wa1, wa2, wn1, wn2};
  for (double w : values) {
    if (!(w >= 0.0 && w <= 1.0)) {
      throw ConfigError("EvalWeights: weights must lie in [0,1]");
    }
  }
  if (std::abs(wa1 + wa2 - 1.0) > 1e-6 || std::abs(wn1 + wn2 - 1.0) > 1e-6) {
    throw ConfigError("EvalWeights: wa1+wa2 and wn1+wn2 must each sum to 1");
  }
}

std::map<std::string, Label> apply_threshold(
    const std::map<std::string, double>& scores, double threshold) {
  std::map<std::string, Label> out;
  for (const auto& [id, score] : scores) {
    out[id] = score > threshold ? Label::kNormal : Label::kAbnormal;
  }
  return out;
}

ConfusionCounts tally_confusion(
    const std::map<std::string, Label>& predictions, const LabelTable& truth) {
  ConfusionCounts counts;
  std::vector<std::string> missing;
  for (const auto& [id, predicted] : predictions) {
    const auto it = truth.entries.find(id);
    if (it == truth.entries.end()) {
      missing.push_back(id);
      continue;
    }
    const bool good = it->second.quality == Quality::kGood;
    const bool true_abnormal = it->second.label == Label::kAbnormal;
    const bool pred_abnormal = predicted == Label::kAbnormal;
    if (true_abnormal) {
      if (pred_abnormal) {
        (good ? counts.aa1 : counts.aa2) += 1;
      } else {
        (good ? counts.an1 : counts.an2) += 1;
      }
    } else {
      if (pred_abnormal) {
        (good ? counts.na1 : counts.na2) += 1;
      } else {
        (good ? counts.nn1 : counts.nn2) += 1;
      }
    }
  }
  check_missing(missing, "tally_confusion");
  return counts;
}

std::pair<double, double> compute_se_sp(const ConfusionCounts& counts,
                                        const EvalWeights& weights) {
  weights.validate();
  const double se_num[2] = {static_cast<double>(counts.aa1),
                            static_cast<double>(counts.aa2 + counts.aq2)};
  const double se_den[2] = {
      static_cast<double>(counts.aa1 + counts.aq1 + counts.an1),
      static_cast<double>(counts.aa2 + counts.aq2 + counts.an2)};
  const double se_w[2] = {weights.wa1, weights.wa2};
  const double se = weighted_rate(se_num, se_den, se_w, "sensitivity");

  const double sp_num[2] = {static_cast<double>(counts.nn1),
                            static_cast<double>(counts.nn2 + counts.nq2)};
  const double sp_den[2] = {
      static_cast<double>(counts.na1 + counts.nq1 + counts.nn1),
      static_cast<double>(counts.na2 + counts.nq2 + counts.nn2)};
  const double sp_w[2] = {weights.wn1, weights.wn2};
  const double sp = weighted_rate(sp_num, sp_den, sp_w, "specificity");
  return {se, sp};
}

double compute_macc(double se, double sp) {
  if (!(se >= 0.0 && se <= 1.0) || !(sp >= 0.0 && sp <= 1.0)) {
    throw InvalidInputError("compute_macc: rates must lie in [0,1]");
  }
  return 0.5 * (se + sp);
}

SweepResult sweep_curve(const std::map<std::string, double>& scores,
                        const LabelTable& truth, const EvalWeights& weights,
                        int grid_size) {
  weights.validate();
  if (scores.empty()) {
    throw InvalidInputError("sweep_curve: no scores");
  }
  if (grid_size < 0 || grid_size == 1) {
    throw ConfigError("sweep_curve: grid size must be 0 (all) or at least 2");
  }

  // Group index: abnormal good, abnormal poor, normal good, normal poor.
  struct Scored {
    double score;
    int group;
  };
  std::vector<Scored> records;
  records.reserve(scores.size());
  double totals[4] = {0.0, 0.0, 0.0, 0.0};
  std::vector<std::string> missing;
  for (const auto& [id, score] : scores) {
    if (!std::isfinite(score)) {
      throw InvalidInputError("sweep_curve: non-finite score for " + id);
    }
    const auto it = truth.entries.find(id);
    if (it == truth.entries.end()) {
      missing.push_back(id);
      continue;
    }
    const int group =
        (it->second.label == Label::kAbnormal ? 0 : 2) +
        (it->second.quality == Quality::kGood ? 0 : 1);
    records.push_back({score, group});
    totals[group] += 1.0;
  }
  check_missing(missing, "sweep_curve");
  if (totals[0] + totals[1] <= 0.0 || totals[2] + totals[3] <= 0.0) {
    throw UndefinedMetricError(
        "sweep_curve: both classes must appear in the reference");
  }

  std::sort(records.begin(), records.end(),
            [](const Scored& a, const Scored& b) { return a.score < b.score; });

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> thresholds;
  thresholds.push_back(-inf);
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].score > records[i - 1].score) {
      thresholds.push_back(0.5 * (records[i - 1].score + records[i].score));
    }
  }
  thresholds.push_back(inf);

  SweepResult result;
  result.best_macc = -1.0;
  std::vector<CurvePoint> full;
  full.reserve(thresholds.size());
  // Records scored <= threshold read Abnormal; walk them in once each.
  double abnormal[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t next = 0;
  for (double threshold : thresholds) {
    while (next < records.size() && records[next].score <= threshold) {
      abnormal[records[next].group] += 1.0;
      ++next;
    }
    const double se_num[2] = {abnormal[0], abnormal[1]};
    const double se_den[2] = {totals[0], totals[1]};
    const double se_w[2] = {weights.wa1, weights.wa2};
    const double sp_num[2] = {totals[2] - abnormal[2],
                              totals[3] - abnormal[3]};
    const double sp_den[2] = {totals[2], totals[3]};
    const double sp_w[2] = {weights.wn1, weights.wn2};
    CurvePoint point;
    point.threshold = threshold;
    point.se = weighted_rate(se_num, se_den, se_w, "sensitivity");
    point.sp = weighted_rate(sp_num, sp_den, sp_w, "specificity");
    full.push_back(point);
    if (point.macc() > result.best_macc) {
      result.best_macc = point.macc();
      result.best_threshold = point.threshold;
      result.best_se = point.se;
      result.best_sp = point.sp;
    }
  }

  if (grid_size == 0 ||
      full.size() <= static_cast<std::size_t>(grid_size)) {
    result.curve = std::move(full);
    return result;
  }
  result.curve.reserve(static_cast<std::size_t>(grid_size));
  const double span = static_cast<double>(full.size() - 1);
  std::size_t last_pick = full.size();
  for (int i = 0; i < grid_size; ++i) {
    const auto pick = static_cast<std::size_t>(
        std::llround(span * static_cast<double>(i) /
                     static_cast<double>(grid_size - 1)));
    if (pick == last_pick) continue;
    result.curve.push_back(full[pick]);
    last_pick = pick;
  }
  return result;
}

}  // namespace hsc
