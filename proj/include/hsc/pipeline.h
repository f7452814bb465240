// hsc/pipeline.h
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

#ifndef HSC_PIPELINE_H_
#define HSC_PIPELINE_H_

#include <map>
#include <string>
#include <vector>

#include "hsc/config.h"
#include "hsc/eval.h"
#include "hsc/gmm.h"
#include "hsc/ivector.h"
#include "hsc/vae.h"

namespace hsc {

// Per-stage diagnostics from one training run; the same numbers land in the
// bundle manifest.
struct TrainSummary {
  int record_count = 0;
  int normal_count = 0;
  int abnormal_count = 0;
  EmTrace ubm_trace;
  TvTrace tv_trace;
  VaeTrace vae_trace;                // populated when reduction = vae
  EmTrace class_normal_trace;        // populated when classifier = gmm
  EmTrace class_abnormal_trace;      // populated when classifier = gmm
  bool svm_converged = true;         // meaningful when classifier = svm
};

// Trains every stage on the labeled WAV files under data_dir and writes the
// stage models plus manifest.json into bundle_dir (created if absent).
// Every WAV must have a label; a record without one aborts the run naming
// it.  Any stage failure is rethrown with the stage name prefixed.
TrainSummary cmd_train(const std::string& data_dir,
                       const std::string& labels_file,
                       const PipelineConfig& config,
                       const std::string& bundle_dir);

// Scores every WAV under data_dir with a trained bundle.  Scores are the
// average-per-frame log likelihood ratio for a GMM back end and the signed
// decision value for an SVM; positive favors Normal either way.  When
// output_csv is non-empty the table is written as "record_id,score" rows
// sorted by id.  An empty directory yields an empty table and a warning on
// stderr.  Bundles whose stages disagree on dimensions are rejected with
// IncompatibleModelError.
std::map<std::string, double> cmd_score(const std::string& data_dir,
                                        const std::string& bundle_dir,
                                        const std::string& output_csv);

// Fixed-threshold evaluation of a scores file against a reference table,
// or a full threshold sweep (sweep = true) reporting the best-MAcc
// operating point.  In sweep mode the curve is also written to curve_csv
// when non-empty; grid_size subsamples it as in sweep_curve.
EvalReport cmd_evaluate(const std::string& scores_csv,
                        const std::string& labels_file,
                        const EvalWeights& weights, bool sweep,
                        double threshold, const std::string& curve_csv,
                        int grid_size = 0);

// One ablation cell: a training-set fraction crossed with a reduction
// method, evaluated at its best swept threshold on the held-out split.
struct AblationCell {
  double fraction = 0.0;
  Reduction reduction = Reduction::kNone;
  bool failed = false;
  std::string error;  // stage message when failed
  double se = 0.0;
  double sp = 0.0;
  double macc = 0.0;
};

// Cumulative training-size sweep: the corpus splits into train/eval by
// config.train_fraction, the train side into config.folds folds, and each
// prefix of 1..folds folds is trained in memory once per reduction method
// (config.reduction is ignored) and scored on the eval side.  A failing
// cell records its error and the sweep moves on.  Cells come out ordered
// by fraction, then none/pca/vae, and are written to output_csv when
// non-empty.
std::vector<AblationCell> cmd_ablate(const std::string& data_dir,
                                     const std::string& labels_file,
                                     const PipelineConfig& config,
                                     const std::string& output_csv);

// Writes one feature-matrix container per record (<id>.hsm under out_dir);
// returns how many records were processed.
int cmd_extract_features(const std::string& data_dir,
                         const PipelineConfig& config,
                         const std::string& out_dir);

// Scores-file round trip used by cmd_score/cmd_evaluate: a "record_id,score"
// header then one row per record, scores printed with enough digits to
// round-trip exactly.
void write_scores(const std::map<std::string, double>& scores,
                  const std::string& path);
std::map<std::string, double> load_scores(const std::string& path);

// Report line of the form {"Se": 0.9500, "Sp": 1.0000, "MAcc": 0.9750,
// "threshold": 0.1234}.
std::string format_report(const EvalReport& report);

}  // namespace hsc

#endif  // HSC_PIPELINE_H_
