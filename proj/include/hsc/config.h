// hsc/config.h
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

#ifndef HSC_CONFIG_H_
#define HSC_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>

#include "hsc/mfcc.h"

namespace hsc {

enum class Reduction { kNone, kPca, kVae };
enum class Classifier { kGmm, kSvm };

const char* reduction_name(Reduction reduction);
const char* classifier_name(Classifier classifier);
Reduction parse_reduction(const std::string& name);
Classifier parse_classifier(const std::string& name);

// Every knob of the training pipeline, expressible as a flat key=value
// file.  Defaults give the full-scale profile (2048-component UBM,
// 128-component class mixtures, the usual MFCC constants); small corpora
// want most of them lowered.
struct PipelineConfig {
  MfccConfig mfcc;

  int ubm_components = 2048;
  int ubm_iterations = 10;

  int ivector_rank = 100;
  int tv_iterations = 5;

  Reduction reduction = Reduction::kNone;
  int reduced_dim = 16;

  Classifier classifier = Classifier::kGmm;
  int class_gmm_components = 128;
  int class_gmm_iterations = 10;

  int vae_hidden = 32;
  int vae_epochs = 200;
  double vae_learning_rate = 0.01;

  double svm_c = 1.0;
  double svm_sigma = 0.0;  // <= 0 selects the median heuristic
  double svm_tolerance = 1e-3;
  int svm_max_passes = 200;

  uint64_t seed = 42;
  double train_fraction = 0.8;
  int folds = 5;

  void validate() const;

  // The resolved configuration as ordered key/value text, exactly the keys
  // accepted by the parser; embedded verbatim in bundle manifests.
  std::map<std::string, std::string> to_entries() const;
};

// Applies one key=value override; unknown keys and unparsable values raise
// ConfigError naming the key.
void apply_config_entry(PipelineConfig& config, const std::string& key,
                        const std::string& value);

// Parses a flat key=value file ('#' comments, blank lines ignored) on top
// of the defaults.
PipelineConfig load_config(const std::string& path);

}  // namespace hsc

#endif  // HSC_CONFIG_H_
