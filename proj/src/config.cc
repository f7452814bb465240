// src/config.cc
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

#include "hsc/config.h"

#include <charconv>
#include <fstream>
#include <string>

#include "hsc/error.h"

namespace hsc {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto result = std::from_chars(first, last, out);
  if (result.ec != std::errc{} || result.ptr != last) {
    throw ConfigError("config: bad value '" + value + "' for key '" + key +
                      "'");
  }
  return out;
}

// Shortest representation that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("config: ") + what);
}

}  // namespace

const char* reduction_name(Reduction reduction) {
  switch (reduction) {
    case Reduction::kNone:
      return "none";
    case Reduction::kPca:
      return "pca";
    case Reduction::kVae:
      return "vae";
  }
  return "none";
}

const char* classifier_name(Classifier classifier) {
  return classifier == Classifier::kSvm ? "svm" : "gmm";
}

Reduction parse_reduction(const std::string& name) {
  if (name == "none") return Reduction::kNone;
  if (name == "pca") return Reduction::kPca;
  if (name == "vae") return Reduction::kVae;
  throw ConfigError("config: unknown reduction '" + name +
                    "' (expected none, pca or vae)");
}

Classifier parse_classifier(const std::string& name) {
  if (name == "gmm") return Classifier::kGmm;
  if (name == "svm") return Classifier::kSvm;
  throw ConfigError("config: unknown classifier '" + name +
                    "' (expected gmm or svm)");
}

void PipelineConfig::validate() const {
  mfcc.validate();
  require(ubm_components >= 1, "ubm_k must be positive");
  require(ubm_iterations >= 1, "ubm_iters must be positive");
  require(ivector_rank >= 1, "rank must be positive");
  require(tv_iterations >= 1, "tv_iters must be positive");
  if (reduction != Reduction::kNone) {
    require(reduced_dim >= 1, "dim must be positive");
    require(reduced_dim <= ivector_rank,
            "dim must not exceed the i-vector rank");
  }
  require(class_gmm_components >= 1, "class_k must be positive");
  require(class_gmm_iterations >= 1, "class_iters must be positive");
  require(vae_hidden >= 1, "vae_hidden must be positive");
  require(vae_epochs >= 1, "vae_epochs must be positive");
  require(vae_learning_rate > 0.0, "vae_lr must be positive");
  require(svm_c > 0.0, "svm_c must be positive");
  require(svm_tolerance > 0.0, "svm_tol must be positive");
  require(svm_max_passes >= 1, "svm_max_passes must be positive");
  require(train_fraction > 0.0 && train_fraction < 1.0,
          "train_fraction must lie strictly between 0 and 1");
  require(folds >= 2, "folds must be at least 2");
}

std::map<std::string, std::string> PipelineConfig::to_entries() const {
  return {
      {"pre_emphasis", format_double(mfcc.pre_emphasis)},
      {"frame_ms", format_double(mfcc.frame_ms)},
      {"hop_ms", format_double(mfcc.hop_ms)},
      {"fft_size", std::to_string(mfcc.fft_size)},
      {"n_filters", std::to_string(mfcc.n_filters)},
      {"n_ceps", std::to_string(mfcc.n_ceps)},
      {"sample_rate", std::to_string(mfcc.sample_rate_hz)},
      {"ubm_k", std::to_string(ubm_components)},
      {"ubm_iters", std::to_string(ubm_iterations)},
      {"rank", std::to_string(ivector_rank)},
      {"tv_iters", std::to_string(tv_iterations)},
      {"reduce", reduction_name(reduction)},
      {"dim", std::to_string(reduced_dim)},
      {"classifier", classifier_name(classifier)},
      {"class_k", std::to_string(class_gmm_components)},
      {"class_iters", std::to_string(class_gmm_iterations)},
      {"vae_hidden", std::to_string(vae_hidden)},
      {"vae_epochs", std::to_string(vae_epochs)},
      {"vae_lr", format_double(vae_learning_rate)},
      {"svm_c", format_double(svm_c)},
      {"svm_sigma", format_double(svm_sigma)},
      {"svm_tol", format_double(svm_tolerance)},
      {"svm_max_passes", std::to_string(svm_max_passes)},
      {"seed", std::to_string(seed)},
      {"train_fraction", format_double(train_fraction)},
      {"folds", std::to_string(folds)},
  };
}

void apply_config_entry(PipelineConfig& config, const std::string& key,
                        const std::string& value) {
  if (key == "pre_emphasis") {
    config.mfcc.pre_emphasis = parse_number<double>(key, value);
  } else if (key == "frame_ms") {
    config.mfcc.frame_ms = parse_number<double>(key, value);
  } else if (key == "hop_ms") {
    config.mfcc.hop_ms = parse_number<double>(key, value);
  } else if (key == "fft_size") {
    config.mfcc.fft_size = parse_number<int>(key, value);
  } else if (key == "n_filters") {
    config.mfcc.n_filters = parse_number<int>(key, value);
  } else if (key == "n_ceps") {
    config.mfcc.n_ceps = parse_number<int>(key, value);
  } else if (key == "sample_rate") {
    config.mfcc.sample_rate_hz = parse_number<int>(key, value);
  } else if (key == "ubm_k") {
    config.ubm_components = parse_number<int>(key, value);
  } else if (key == "ubm_iters") {
    config.ubm_iterations = parse_number<int>(key, value);
  } else if (key == "rank") {
    config.ivector_rank = parse_number<int>(key, value);
  } else if (key == "tv_iters") {
    config.tv_iterations = parse_number<int>(key, value);
  } else if (key == "reduce") {
    config.reduction = parse_reduction(value);
  } else if (key == "dim") {
    config.reduced_dim = parse_number<int>(key, value);
  } else if (key == "classifier") {
    config.classifier = parse_classifier(value);
  } else if (key == "class_k") {
    config.class_gmm_components = parse_number<int>(key, value);
  } else if (key == "class_iters") {
    config.class_gmm_iterations = parse_number<int>(key, value);
  } else if (key == "vae_hidden") {
    config.vae_hidden = parse_number<int>(key, value);
  } else if (key == "vae_epochs") {
    config.vae_epochs = parse_number<int>(key, value);
  } else if (key == "vae_lr") {
    config.vae_learning_rate = parse_number<double>(key, value);
  } else if (key == "svm_c") {
    config.svm_c = parse_number<double>(key, value);
  } else if (key == "svm_sigma") {
    config.svm_sigma = parse_number<double>(key, value);
  } else if (key == "svm_tol") {
    config.svm_tolerance = parse_number<double>(key, value);
  } else if (key == "svm_max_passes") {
    config.svm_max_passes = parse_number<int>(key, value);
  } else if (key == "seed") {
    config.seed = parse_number<uint64_t>(key, value);
  } else if (key == "train_fraction") {
    config.train_fraction = parse_number<double>(key, value);
  } else if (key == "folds") {
    config.folds = parse_number<int>(key, value);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("config: cannot open " + path);
  }
  PipelineConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: " + path + ":" + std::to_string(line_no) +
                        " is not key=value");
    }
    apply_config_entry(config, trim(stripped.substr(0, eq)),
                       trim(stripped.substr(eq + 1)));
  }
  return config;
}

}  // namespace hsc
