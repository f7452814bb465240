// src/pipeline.cc
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

#include "hsc/pipeline.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <utility>

#include <json.hpp>

#include "hsc/container.h"
#include "hsc/error.h"
#include "hsc/labels.h"
#include "hsc/mfcc.h"
#include "hsc/pca.h"
#include "hsc/split.h"
#include "hsc/svm.h"
#include "hsc/wav.h"

namespace hsc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Rethrows any stage failure with the stage name prefixed, so a pipeline
// abort always says which stage died.
template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw Error(std::string("stage '") + stage + "': " + e.what());
  }
}

// Every *.wav under data_dir, recursively, sorted by path.  File stems are
// the record ids, so they must be unique across subdirectories.
std::vector<fs::path> list_wav_files(const std::string& data_dir) {
  fs::path root(data_dir);
  if (!fs::exists(root)) {
    throw InvalidInputError("data directory '" + data_dir + "' does not exist");
  }
  if (!fs::is_directory(root)) {
    throw InvalidInputError("'" + data_dir + "' is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.generic_string() < b.generic_string();
            });
  std::set<std::string> seen;
  for (const auto& f : files) {
    if (!seen.insert(f.stem().string()).second) {
      throw InvalidInputError("duplicate record id '" + f.stem().string() +
                              "' under '" + data_dir + "'");
    }
  }
  return files;
}

std::vector<AudioRecord> load_corpus(const std::string& data_dir) {
  std::vector<AudioRecord> records;
  for (const auto& f : list_wav_files(data_dir)) {
    records.push_back(load_wav(f.string()));
  }
  return records;
}

// Copies label and quality onto each record; unlabeled records abort the
// run, all of them named at once.
void attach_labels(std::vector<AudioRecord>& records, const LabelTable& table) {
  std::string missing;
  for (auto& record : records) {
    auto it = table.entries.find(record.record_id);
    if (it == table.entries.end()) {
      if (!missing.empty()) missing += ", ";
      missing += record.record_id;
      continue;
    }
    record.label = it->second.label;
    record.quality = it->second.quality;
  }
  if (!missing.empty()) {
    throw InvalidInputError("records without labels: " + missing);
  }
}

// The trained stages of one pipeline.  Exactly one classifier is set, and
// at most one reduction.
struct Bundle {
  PipelineConfig config;
  Gmm ubm;
  TotalVariabilityModel tv;
  std::optional<PcaModel> pca;
  std::optional<VaeModel> vae;
  std::optional<std::pair<Gmm, Gmm>> class_gmms;  // (normal, abnormal)
  std::optional<SvmModel> svm;
};

// Features plus labels, decoupled from AudioRecord so ablation cells can
// reuse per-record features without re-reading audio.
struct TrainInputs {
  std::vector<FeatureMatrix> features;
  std::vector<Label> labels;
};

Bundle train_bundle(const TrainInputs& inputs, const PipelineConfig& config,
                    TrainSummary* summary) {
  TrainSummary local;
  TrainSummary& sum = summary ? *summary : local;
  Bundle bundle;
  bundle.config = config;

  run_stage("corpus", [&] {
    if (inputs.features.empty()) {
      throw InvalidInputError("training corpus is empty");
    }
    sum.record_count = static_cast<int>(inputs.features.size());
    sum.normal_count = static_cast<int>(
        std::count(inputs.labels.begin(), inputs.labels.end(), Label::kNormal));
    sum.abnormal_count = sum.record_count - sum.normal_count;
    if (sum.normal_count == 0 || sum.abnormal_count == 0) {
      throw InvalidInputError(
          "training corpus must contain both classes; got " +
          std::to_string(sum.normal_count) + " normal and " +
          std::to_string(sum.abnormal_count) + " abnormal records");
    }
  });

  EmOptions ubm_options;
  ubm_options.iterations = config.ubm_iterations;
  ubm_options.seed = config.seed;
  bundle.ubm = run_stage("ubm", [&] {
    return em_fit(stack_rows(inputs.features), config.ubm_components,
                  ubm_options, &sum.ubm_trace);
  });

  auto stats = run_stage("stats", [&] {
    return accumulate_stats_batch(bundle.ubm, inputs.features);
  });

  TvOptions tv_options;
  tv_options.rank = config.ivector_rank;
  tv_options.iterations = config.tv_iterations;
  tv_options.seed = config.seed;
  bundle.tv = run_stage("total-variability", [&] {
    return train_tv(bundle.ubm, stats, tv_options, &sum.tv_trace);
  });

  Eigen::MatrixXd ivectors = run_stage(
      "ivectors", [&] { return extract_ivectors(bundle.tv, stats); });

  Eigen::MatrixXd reduced = run_stage("reduction", [&]() -> Eigen::MatrixXd {
    switch (config.reduction) {
      case Reduction::kNone:
        return ivectors;
      case Reduction::kPca:
        bundle.pca = pca_fit(ivectors, config.reduced_dim);
        return pca_project_rows(*bundle.pca, ivectors);
      case Reduction::kVae: {
        VaeOptions options;
        options.latent_dim = config.reduced_dim;
        options.hidden_width = config.vae_hidden;
        options.epochs = config.vae_epochs;
        options.learning_rate = config.vae_learning_rate;
        options.seed = config.seed;
        bundle.vae = vae_fit(ivectors, options, &sum.vae_trace);
        return vae_encode_rows(*bundle.vae, ivectors);
      }
    }
    throw ConfigError("unknown reduction method");
  });

  run_stage("classifier", [&] {
    if (config.classifier == Classifier::kGmm) {
      Eigen::MatrixXd normal_rows(sum.normal_count, reduced.cols());
      Eigen::MatrixXd abnormal_rows(sum.abnormal_count, reduced.cols());
      int n = 0;
      int a = 0;
      for (int i = 0; i < reduced.rows(); ++i) {
        if (inputs.labels[static_cast<size_t>(i)] == Label::kNormal) {
          normal_rows.row(n++) = reduced.row(i);
        } else {
          abnormal_rows.row(a++) = reduced.row(i);
        }
      }
      EmOptions class_options;
      class_options.iterations = config.class_gmm_iterations;
      class_options.seed = config.seed;
      bundle.class_gmms = train_class_gmms(
          normal_rows, abnormal_rows, config.class_gmm_components,
          class_options, &sum.class_normal_trace, &sum.class_abnormal_trace);
    } else {
      std::vector<int> targets(inputs.labels.size());
      for (size_t i = 0; i < inputs.labels.size(); ++i) {
        targets[i] = inputs.labels[i] == Label::kNormal ? 1 : -1;
      }
      SvmOptions options;
      options.c = config.svm_c;
      options.sigma = config.svm_sigma;
      options.tolerance = config.svm_tolerance;
      options.max_passes = config.svm_max_passes;
      options.seed = config.seed;
      bundle.svm = svm_train(reduced, targets, options);
      sum.svm_converged = bundle.svm->converged;
    }
  });

  return bundle;
}

// Stats, i-vector, reduction, and the classifier score for each feature
// matrix, in input order.
std::vector<double> score_features(const Bundle& bundle,
                                   const std::vector<FeatureMatrix>& features) {
  auto stats = accumulate_stats_batch(bundle.ubm, features);
  Eigen::MatrixXd ivectors = extract_ivectors(bundle.tv, stats);
  Eigen::MatrixXd reduced;
  if (bundle.pca) {
    reduced = pca_project_rows(*bundle.pca, ivectors);
  } else if (bundle.vae) {
    reduced = vae_encode_rows(*bundle.vae, ivectors);
  } else {
    reduced = std::move(ivectors);
  }
  std::vector<double> scores(features.size());
  if (bundle.class_gmms) {
    for (int i = 0; i < reduced.rows(); ++i) {
      scores[static_cast<size_t>(i)] =
          llr_score(bundle.class_gmms->first, bundle.class_gmms->second,
                    reduced.row(i));
    }
  } else if (bundle.svm) {
    Eigen::VectorXd values = svm_decision_rows(*bundle.svm, reduced);
    for (int i = 0; i < values.size(); ++i) {
      scores[static_cast<size_t>(i)] = values[i];
    }
  } else {
    throw IncompatibleModelError("bundle carries no classifier model");
  }
  return scores;
}

json trace_to_json(const EmTrace& trace) {
  return json{{"avg_log_likelihood", trace.avg_log_likelihood},
              {"reinitialized_components", trace.reinitialized_components}};
}

void save_bundle(const Bundle& bundle, const std::string& bundle_dir,
                 const TrainSummary& summary) {
  fs::path dir(bundle_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create bundle directory '" + bundle_dir +
                "': " + ec.message());
  }
  json files;
  save_model(bundle.ubm, (dir / "ubm.hsm").string());
  files["ubm"] = "ubm.hsm";
  save_model(bundle.tv, (dir / "tv.hsm").string());
  files["tv"] = "tv.hsm";
  if (bundle.pca) {
    save_model(*bundle.pca, (dir / "pca.hsm").string());
    files["reduction"] = "pca.hsm";
  } else if (bundle.vae) {
    save_model(*bundle.vae, (dir / "vae.hsm").string());
    files["reduction"] = "vae.hsm";
  }
  if (bundle.class_gmms) {
    save_gmm_pair(bundle.class_gmms->first, bundle.class_gmms->second,
                  (dir / "classifier.hsm").string());
  } else {
    save_model(*bundle.svm, (dir / "classifier.hsm").string());
  }
  files["classifier"] = "classifier.hsm";

  json diagnostics;
  diagnostics["ubm"] = trace_to_json(summary.ubm_trace);
  diagnostics["tv"] = {
      {"residual", summary.tv_trace.residual},
      {"residual_monotonic", summary.tv_trace.residual_monotonic},
      {"skipped_components", summary.tv_trace.skipped_components}};
  if (bundle.vae) {
    diagnostics["vae"] = {
        {"epoch_elbo", summary.vae_trace.epoch_elbo},
        {"reduction_pointless", summary.vae_trace.reduction_pointless}};
  }
  if (bundle.class_gmms) {
    diagnostics["class_gmm"] = {
        {"normal", trace_to_json(summary.class_normal_trace)},
        {"abnormal", trace_to_json(summary.class_abnormal_trace)}};
  }
  if (bundle.svm) {
    diagnostics["svm"] = {{"converged", summary.svm_converged}};
  }

  json manifest;
  manifest["bundle_version"] = 1;
  manifest["config"] = json(bundle.config.to_entries());
  manifest["records"] = {{"total", summary.record_count},
                         {"normal", summary.normal_count},
                         {"abnormal", summary.abnormal_count}};
  manifest["diagnostics"] = diagnostics;
  manifest["files"] = files;

  fs::path manifest_path = dir / "manifest.json";
  std::ofstream out(manifest_path);
  if (!out) {
    throw Error("cannot write '" + manifest_path.string() + "'");
  }
  out << manifest.dump(2) << '\n';
  if (!out) {
    throw Error("failed writing '" + manifest_path.string() + "'");
  }
}

// Stage dimensions must agree end to end; a bundle assembled from mismatched
// stage files is rejected before any audio is read.
void check_bundle(const Bundle& bundle) {
  const auto mismatch = [](const std::string& what) {
    throw IncompatibleModelError("bundle stage mismatch: " + what);
  };
  if (bundle.ubm.dim() != bundle.config.mfcc.n_ceps) {
    mismatch("UBM dimension " + std::to_string(bundle.ubm.dim()) +
             " vs n_ceps " + std::to_string(bundle.config.mfcc.n_ceps));
  }
  if (bundle.tv.components != bundle.ubm.components() ||
      bundle.tv.feat_dim != bundle.ubm.dim()) {
    mismatch("factor loadings built for " +
             std::to_string(bundle.tv.components) + "x" +
             std::to_string(bundle.tv.feat_dim) + " but the UBM has " +
             std::to_string(bundle.ubm.components()) + "x" +
             std::to_string(bundle.ubm.dim()));
  }
  int reduced_dim = bundle.tv.rank();
  if (bundle.pca) {
    if (bundle.pca->input_dim() != bundle.tv.rank()) {
      mismatch("PCA input dimension " +
               std::to_string(bundle.pca->input_dim()) + " vs factor rank " +
               std::to_string(bundle.tv.rank()));
    }
    reduced_dim = bundle.pca->output_dim();
  } else if (bundle.vae) {
    if (bundle.vae->input_dim() != bundle.tv.rank()) {
      mismatch("VAE input dimension " +
               std::to_string(bundle.vae->input_dim()) + " vs factor rank " +
               std::to_string(bundle.tv.rank()));
    }
    reduced_dim = bundle.vae->latent_dim();
  }
  if (bundle.class_gmms) {
    if (bundle.class_gmms->first.dim() != reduced_dim ||
        bundle.class_gmms->second.dim() != reduced_dim) {
      mismatch("class mixtures of dimension " +
               std::to_string(bundle.class_gmms->first.dim()) + "/" +
               std::to_string(bundle.class_gmms->second.dim()) +
               " vs reduced dimension " + std::to_string(reduced_dim));
    }
  } else if (bundle.svm && bundle.svm->count() > 0 &&
             bundle.svm->dim() != reduced_dim) {
    mismatch("SVM dimension " + std::to_string(bundle.svm->dim()) +
             " vs reduced dimension " + std::to_string(reduced_dim));
  }
}

Bundle load_bundle(const std::string& bundle_dir) {
  fs::path dir(bundle_dir);
  fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) {
    throw Error("cannot open '" + manifest_path.string() + "'");
  }
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }

  Bundle bundle;
  std::string ubm_file;
  std::string tv_file;
  std::string reduction_file;
  std::string classifier_file;
  try {
    int version = manifest.at("bundle_version").get<int>();
    if (version != 1) {
      throw IncompatibleModelError("unsupported bundle version " +
                                   std::to_string(version));
    }
    for (const auto& item : manifest.at("config").items()) {
      apply_config_entry(bundle.config, item.key(),
                         item.value().get<std::string>());
    }
    const json& files = manifest.at("files");
    ubm_file = files.at("ubm").get<std::string>();
    tv_file = files.at("tv").get<std::string>();
    classifier_file = files.at("classifier").get<std::string>();
    if (bundle.config.reduction != Reduction::kNone) {
      reduction_file = files.at("reduction").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  bundle.config.validate();

  bundle.ubm = load_gmm((dir / ubm_file).string());
  bundle.tv = load_tv((dir / tv_file).string());
  if (bundle.config.reduction == Reduction::kPca) {
    bundle.pca = load_pca((dir / reduction_file).string());
  } else if (bundle.config.reduction == Reduction::kVae) {
    bundle.vae = load_vae((dir / reduction_file).string());
  }
  if (bundle.config.classifier == Classifier::kGmm) {
    bundle.class_gmms = load_gmm_pair((dir / classifier_file).string());
  } else {
    bundle.svm = load_svm((dir / classifier_file).string());
  }
  check_bundle(bundle);
  return bundle;
}

void write_ablation_csv(const std::vector<AblationCell>& cells,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write ablation file '" + path + "'");
  }
  out << "fraction,reduction,se,sp,macc\n";
  char buf[128];
  for (const auto& cell : cells) {
    std::snprintf(buf, sizeof(buf), "%.2f,%s,", cell.fraction,
                  reduction_name(cell.reduction));
    out << buf;
    if (cell.failed) {
      out << "error,error,error\n";
    } else {
      std::snprintf(buf, sizeof(buf), "%.4f,%.4f,%.4f\n", cell.se, cell.sp,
                    cell.macc);
      out << buf;
    }
  }
  if (!out) {
    throw Error("failed writing ablation file '" + path + "'");
  }
}

}  // namespace

TrainSummary cmd_train(const std::string& data_dir,
                       const std::string& labels_file,
                       const PipelineConfig& config,
                       const std::string& bundle_dir) {
  run_stage("config", [&] { config.validate(); });

  std::vector<AudioRecord> records = run_stage("ingest", [&] {
    LabelTable table = load_reference(labels_file);
    std::vector<AudioRecord> loaded = load_corpus(data_dir);
    if (loaded.empty()) {
      throw InvalidInputError("no WAV records under '" + data_dir + "'");
    }
    attach_labels(loaded, table);
    return loaded;
  });

  TrainInputs inputs;
  inputs.features = run_stage(
      "features", [&] { return extract_mfcc_batch(records, config.mfcc); });
  inputs.labels.reserve(records.size());
  for (const auto& record : records) inputs.labels.push_back(*record.label);

  TrainSummary summary;
  Bundle bundle = train_bundle(inputs, config, &summary);
  run_stage("save", [&] { save_bundle(bundle, bundle_dir, summary); });
  return summary;
}

std::map<std::string, double> cmd_score(const std::string& data_dir,
                                        const std::string& bundle_dir,
                                        const std::string& output_csv) {
  Bundle bundle = load_bundle(bundle_dir);
  std::map<std::string, double> scores;
  std::vector<AudioRecord> records = load_corpus(data_dir);
  if (records.empty()) {
    std::fprintf(stderr, "warning: no WAV records under '%s'\n",
                 data_dir.c_str());
  } else {
    auto features = extract_mfcc_batch(records, bundle.config.mfcc);
    auto values = score_features(bundle, features);
    for (size_t i = 0; i < records.size(); ++i) {
      scores[records[i].record_id] = values[i];
    }
  }
  if (!output_csv.empty()) write_scores(scores, output_csv);
  return scores;
}

EvalReport cmd_evaluate(const std::string& scores_csv,
                        const std::string& labels_file,
                        const EvalWeights& weights, bool sweep,
                        double threshold, const std::string& curve_csv,
                        int grid_size) {
  weights.validate();
  auto scores = load_scores(scores_csv);
  LabelTable truth = load_reference(labels_file);

  EvalReport report;
  if (sweep) {
    SweepResult result = sweep_curve(scores, truth, weights, grid_size);
    report.se = result.best_se;
    report.sp = result.best_sp;
    report.macc = result.best_macc;
    report.threshold = result.best_threshold;
    report.curve = result.curve;
    if (!curve_csv.empty()) {
      std::ofstream out(curve_csv);
      if (!out) {
        throw Error("cannot write curve file '" + curve_csv + "'");
      }
      out << "threshold,Se,Sp,MAcc\n";
      char buf[160];
      for (const auto& point : report.curve) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n",
                      point.threshold, point.se, point.sp, point.macc());
        out << buf;
      }
      if (!out) {
        throw Error("failed writing curve file '" + curve_csv + "'");
      }
    }
  } else {
    auto predictions = apply_threshold(scores, threshold);
    ConfusionCounts counts = tally_confusion(predictions, truth);
    auto [se, sp] = compute_se_sp(counts, weights);
    report.se = se;
    report.sp = sp;
    report.macc = compute_macc(se, sp);
    report.threshold = threshold;
  }
  return report;
}

std::vector<AblationCell> cmd_ablate(const std::string& data_dir,
                                     const std::string& labels_file,
                                     const PipelineConfig& config,
                                     const std::string& output_csv) {
  config.validate();
  LabelTable table = load_reference(labels_file);
  std::vector<AudioRecord> records = load_corpus(data_dir);
  if (records.empty()) {
    throw InvalidInputError("no WAV records under '" + data_dir + "'");
  }
  attach_labels(records, table);

  // Features once per record; cells reassemble subsets by id.
  std::vector<FeatureMatrix> features = extract_mfcc_batch(records, config.mfcc);
  std::map<std::string, size_t> index;
  LabelTable present;
  for (size_t i = 0; i < records.size(); ++i) {
    index[records[i].record_id] = i;
    present.entries[records[i].record_id] = {*records[i].label,
                                             records[i].quality};
  }

  SplitSpec spec;
  spec.train_fraction = config.train_fraction;
  spec.seed = config.seed;
  spec.fold_count = config.folds;
  auto [train_table, eval_table] = split_train_eval(present, spec);
  std::vector<LabelTable> folds = split_folds(train_table, spec);

  TrainInputs eval_inputs;
  for (const auto& [id, entry] : eval_table.entries) {
    eval_inputs.features.push_back(features[index.at(id)]);
  }

  const EvalWeights weights;
  const Reduction methods[] = {Reduction::kNone, Reduction::kPca,
                               Reduction::kVae};
  std::vector<AblationCell> cells;
  LabelTable cumulative;
  for (int k = 1; k <= config.folds; ++k) {
    for (const auto& [id, entry] : folds[static_cast<size_t>(k - 1)].entries) {
      cumulative.entries[id] = entry;
    }
    TrainInputs train_inputs;
    for (const auto& [id, entry] : cumulative.entries) {
      train_inputs.features.push_back(features[index.at(id)]);
      train_inputs.labels.push_back(entry.label);
    }
    for (Reduction method : methods) {
      AblationCell cell;
      cell.fraction = static_cast<double>(k) / config.folds;
      cell.reduction = method;
      try {
        PipelineConfig cell_config = config;
        cell_config.reduction = method;
        Bundle bundle = train_bundle(train_inputs, cell_config, nullptr);
        auto values = score_features(bundle, eval_inputs.features);
        std::map<std::string, double> scores;
        size_t i = 0;
        for (const auto& [id, entry] : eval_table.entries) {
          scores[id] = values[i++];
        }
        SweepResult result = sweep_curve(scores, eval_table, weights);
        cell.se = result.best_se;
        cell.sp = result.best_sp;
        cell.macc = result.best_macc;
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  if (!output_csv.empty()) write_ablation_csv(cells, output_csv);
  return cells;
}

int cmd_extract_features(const std::string& data_dir,
                         const PipelineConfig& config,
                         const std::string& out_dir) {
  config.validate();
  std::vector<AudioRecord> records = load_corpus(data_dir);
  if (records.empty()) {
    std::fprintf(stderr, "warning: no WAV records under '%s'\n",
                 data_dir.c_str());
    return 0;
  }
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create output directory '" + out_dir +
                "': " + ec.message());
  }
  auto features = extract_mfcc_batch(records, config.mfcc);
  for (size_t i = 0; i < records.size(); ++i) {
    save_feature_matrix(features[i],
                        (dir / (records[i].record_id + ".hsm")).string());
  }
  return static_cast<int>(records.size());
}

void write_scores(const std::map<std::string, double>& scores,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write scores file '" + path + "'");
  }
  out << "record_id,score\n";
  char buf[64];
  for (const auto& [id, score] : scores) {
    std::snprintf(buf, sizeof(buf), "%.17g", score);
    out << id << ',' << buf << '\n';
  }
  if (!out) {
    throw Error("failed writing scores file '" + path + "'");
  }
}

std::map<std::string, double> load_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open scores file '" + path + "'");
  }
  std::map<std::string, double> scores;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line == "record_id,score") continue;
    auto context = [&] {
      return "scores file '" + path + "' line " + std::to_string(lineno);
    };
    size_t comma = line.find(',');
    if (comma == std::string::npos || comma == 0) {
      throw FormatError(context() + ": expected 'record_id,score'");
    }
    std::string id = line.substr(0, comma);
    std::string text = line.substr(comma + 1);
    size_t begin = text.find_first_not_of(" \t");
    size_t end = text.find_last_not_of(" \t");
    if (begin == std::string::npos) {
      throw FormatError(context() + ": missing score");
    }
    text = text.substr(begin, end - begin + 1);
    double value = 0.0;
    auto [ptr, errc] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (errc != std::errc() || ptr != text.data() + text.size()) {
      throw FormatError(context() + ": bad score '" + text + "'");
    }
    if (!scores.emplace(id, value).second) {
      throw FormatError(context() + ": duplicate record id '" + id + "'");
    }
  }
  return scores;
}

std::string format_report(const EvalReport& report) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "{\"Se\": %.4f, \"Sp\": %.4f, \"MAcc\": %.4f, "
                "\"threshold\": %.6g}",
                report.se, report.sp, report.macc, report.threshold);
  return buf;
}

}  // namespace hsc
