// hsc/eval.h
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

#ifndef HSC_EVAL_H_
#define HSC_EVAL_H_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hsc/audio.h"
#include "hsc/labels.h"

namespace hsc {

// Quality-partition weights for the modified sensitivity/specificity.
// Defaults are the training-set record proportions of the 2016 challenge
// corpus.  Each pair must sum to 1.
struct EvalWeights {
  double wa1 = 0.8602;
  double wa2 = 0.1398;
  double wn1 = 0.9252;
  double wn2 = 0.0748;

  void validate() const;
};

// Counts keyed as <true class><predicted class><quality>: true class A/N,
// predicted a/q/n, quality 1 good / 2 poor.  The q (unsure) columns exist
// for the metric definitions but this pipeline never predicts unsure, so
// they stay zero.
struct ConfusionCounts {
  int64_t aa1 = 0, aq1 = 0, an1 = 0;
  int64_t aa2 = 0, aq2 = 0, an2 = 0;
  int64_t na1 = 0, nq1 = 0, nn1 = 0;
  int64_t na2 = 0, nq2 = 0, nn2 = 0;

  int64_t total() const {
    return aa1 + aq1 + an1 + aa2 + aq2 + an2 + na1 + nq1 + nn1 + na2 + nq2 +
           nn2;
  }
};

struct CurvePoint {
  double threshold = 0.0;
  double se = 0.0;
  double sp = 0.0;

  double macc() const { return 0.5 * (se + sp); }
};

// curve holds the swept operating points; best_* describe the threshold
// maximizing MAcc over the full (pre-subsampling) sweep.
struct SweepResult {
  std::vector<CurvePoint> curve;
  double best_threshold = 0.0;
  double best_se = 0.0;
  double best_sp = 0.0;
  double best_macc = 0.0;
};

struct EvalReport {
  double se = 0.0;
  double sp = 0.0;
  double macc = 0.0;
  double threshold = 0.0;
  std::vector<CurvePoint> curve;
};

// score > threshold reads Normal; ties fall to Abnormal.  Never emits any
// other label.
std::map<std::string, Label> apply_threshold(
    const std::map<std::string, double>& scores, double threshold);

// Partitions predictions by (true class, predicted class, quality) against
// the reference table.  Ids missing from the table are an error, reported
// together.
ConfusionCounts tally_confusion(const std::map<std::string, Label>& predictions,
                                const LabelTable& truth);

// Weighted sensitivity and specificity.  A quality partition with a zero
// denominator is dropped and the surviving weights renormalized to sum 1;
// if a class has no records in either partition its metric is undefined.
std::pair<double, double> compute_se_sp(const ConfusionCounts& counts,
                                        const EvalWeights& weights);

// Mean of the two rates.
double compute_macc(double se, double sp);

// Sweeps thresholds over the midpoints of adjacent distinct scores plus
// sentinels below and above every score.  grid_size 0 keeps every point;
// otherwise the curve is subsampled to at most grid_size points keeping
// both endpoints (best_* always reflect the full sweep).
SweepResult sweep_curve(const std::map<std::string, double>& scores,
                        const LabelTable& truth, const EvalWeights& weights,
                        int grid_size = 0);

}  // namespace hsc

#endif  // HSC_EVAL_H_
