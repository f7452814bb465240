// tools/hsc_main.cc
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

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsc/config.h"
#include "hsc/error.h"
#include "hsc/eval.h"
#include "hsc/pipeline.h"

namespace {

// Config file plus the flag overrides shared by the training-style
// subcommands.  Overrides stay strings so one parser (apply_config_entry)
// validates every path into the config.
struct ConfigArgs {
  std::string config_file;
  std::string seed;
  std::string ubm_k;
  std::string rank;
  std::string reduce;
  std::string dim;
  std::string classifier;
  std::string class_k;
  std::string folds;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* ubm_k_opt = nullptr;
  CLI::Option* rank_opt = nullptr;
  CLI::Option* reduce_opt = nullptr;
  CLI::Option* dim_opt = nullptr;
  CLI::Option* classifier_opt = nullptr;
  CLI::Option* class_k_opt = nullptr;
  CLI::Option* folds_opt = nullptr;
};

std::shared_ptr<ConfigArgs> add_config_options(CLI::App* cmd) {
  auto args = std::make_shared<ConfigArgs>();
  cmd->add_option("--config", args->config_file,
                  "key=value config file applied before flag overrides");
  args->seed_opt = cmd->add_option("--seed", args->seed, "master RNG seed");
  args->ubm_k_opt =
      cmd->add_option("--ubm-k", args->ubm_k, "UBM component count");
  args->rank_opt =
      cmd->add_option("--rank", args->rank, "i-vector dimension (rank of T)");
  args->reduce_opt = cmd->add_option("--reduce", args->reduce,
                                     "reduction method: none|pca|vae");
  args->dim_opt = cmd->add_option("--dim", args->dim, "reduced dimension");
  args->classifier_opt = cmd->add_option("--classifier", args->classifier,
                                         "back end: gmm|svm");
  args->class_k_opt = cmd->add_option("--class-k", args->class_k,
                                      "per-class GMM component count");
  args->folds_opt =
      cmd->add_option("--folds", args->folds, "fold count for ablation");
  return args;
}

hsc::PipelineConfig resolve_config(const ConfigArgs& args) {
  hsc::PipelineConfig config;
  if (!args.config_file.empty()) config = hsc::load_config(args.config_file);
  if (args.seed_opt->count()) {
    hsc::apply_config_entry(config, "seed", args.seed);
  }
  if (args.ubm_k_opt->count()) {
    hsc::apply_config_entry(config, "ubm_k", args.ubm_k);
  }
  if (args.rank_opt->count()) {
    hsc::apply_config_entry(config, "rank", args.rank);
  }
  if (args.reduce_opt->count()) {
    hsc::apply_config_entry(config, "reduce", args.reduce);
  }
  if (args.dim_opt->count()) {
    hsc::apply_config_entry(config, "dim", args.dim);
  }
  if (args.classifier_opt->count()) {
    hsc::apply_config_entry(config, "classifier", args.classifier);
  }
  if (args.class_k_opt->count()) {
    hsc::apply_config_entry(config, "class_k", args.class_k);
  }
  if (args.folds_opt->count()) {
    hsc::apply_config_entry(config, "folds", args.folds);
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heart sound normal/abnormal classification pipeline"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand(
      "train", "train UBM, factor loadings, reduction, and classifier");
  auto train_paths = std::make_shared<std::vector<std::string>>(3);
  train->add_option("--data", (*train_paths)[0], "directory of WAV files")
      ->required();
  train->add_option("--labels", (*train_paths)[1], "reference label CSV")
      ->required();
  train->add_option("--out", (*train_paths)[2], "bundle output directory")
      ->required();
  auto train_cfg = add_config_options(train);
  train->callback([train_paths, train_cfg] {
    hsc::PipelineConfig config = resolve_config(*train_cfg);
    hsc::TrainSummary summary =
        hsc::cmd_train((*train_paths)[0], (*train_paths)[1], config,
                       (*train_paths)[2]);
    std::printf("trained on %d records (%d normal, %d abnormal); bundle at %s\n",
                summary.record_count, summary.normal_count,
                summary.abnormal_count, (*train_paths)[2].c_str());
    if (!summary.tv_trace.residual_monotonic) {
      std::fprintf(stderr,
                   "warning: factor-update residual increased during training\n");
    }
    if (config.classifier == hsc::Classifier::kSvm && !summary.svm_converged) {
      std::fprintf(stderr,
                   "warning: SVM sweep budget exhausted before convergence\n");
    }
    if (config.reduction == hsc::Reduction::kVae &&
        summary.vae_trace.reduction_pointless) {
      std::fprintf(stderr,
                   "warning: latent dimension is not below the input dimension\n");
    }
  });

  // score
  auto* score = app.add_subcommand("score", "score WAV files with a bundle");
  auto score_paths = std::make_shared<std::vector<std::string>>(3);
  score->add_option("--data", (*score_paths)[0], "directory of WAV files")
      ->required();
  score->add_option("--bundle", (*score_paths)[1], "trained bundle directory")
      ->required();
  score->add_option("--out", (*score_paths)[2], "output scores CSV")
      ->required();
  score->callback([score_paths] {
    auto scores = hsc::cmd_score((*score_paths)[0], (*score_paths)[1],
                                 (*score_paths)[2]);
    std::printf("scored %zu records; table at %s\n", scores.size(),
                (*score_paths)[2].c_str());
  });

  // evaluate
  auto* evaluate =
      app.add_subcommand("evaluate", "weighted Se/Sp/MAcc of a scores file");
  struct EvalArgs {
    std::string scores;
    std::string labels;
    std::string curve;
    std::vector<double> weights;
    double threshold = 0.0;
    bool sweep = false;
    int grid = 0;
    CLI::Option* threshold_opt = nullptr;
  };
  auto eval_args = std::make_shared<EvalArgs>();
  evaluate->add_option("--scores", eval_args->scores, "scores CSV")->required();
  evaluate->add_option("--labels", eval_args->labels, "reference label CSV")
      ->required();
  eval_args->threshold_opt = evaluate->add_option(
      "--threshold", eval_args->threshold, "fixed decision threshold");
  evaluate->add_flag("--sweep", eval_args->sweep,
                     "sweep thresholds and report the best MAcc");
  evaluate
      ->add_option("--weights", eval_args->weights,
                   "wa1,wa2,wn1,wn2 quality weights")
      ->delimiter(',')
      ->expected(4);
  evaluate->add_option("--curve", eval_args->curve,
                       "curve CSV output (sweep only)");
  evaluate->add_option("--grid", eval_args->grid,
                       "subsample the curve to at most this many points");
  evaluate->callback([eval_args] {
    bool have_threshold = eval_args->threshold_opt->count() > 0;
    if (have_threshold == eval_args->sweep) {
      throw hsc::ConfigError("pass exactly one of --threshold or --sweep");
    }
    hsc::EvalWeights weights;
    if (eval_args->weights.size() == 4) {
      weights.wa1 = eval_args->weights[0];
      weights.wa2 = eval_args->weights[1];
      weights.wn1 = eval_args->weights[2];
      weights.wn2 = eval_args->weights[3];
    }
    hsc::EvalReport report = hsc::cmd_evaluate(
        eval_args->scores, eval_args->labels, weights, eval_args->sweep,
        eval_args->threshold, eval_args->curve, eval_args->grid);
    std::printf("%s\n", hsc::format_report(report).c_str());
  });

  // ablate
  auto* ablate = app.add_subcommand(
      "ablate", "MAcc versus training-set size per reduction method");
  auto ablate_paths = std::make_shared<std::vector<std::string>>(3);
  ablate->add_option("--data", (*ablate_paths)[0], "directory of WAV files")
      ->required();
  ablate->add_option("--labels", (*ablate_paths)[1], "reference label CSV")
      ->required();
  ablate->add_option("--out", (*ablate_paths)[2], "grid CSV output");
  auto ablate_cfg = add_config_options(ablate);
  ablate->callback([ablate_paths, ablate_cfg] {
    hsc::PipelineConfig config = resolve_config(*ablate_cfg);
    auto cells = hsc::cmd_ablate((*ablate_paths)[0], (*ablate_paths)[1],
                                 config, (*ablate_paths)[2]);
    std::printf("fraction  reduction  se      sp      macc\n");
    for (const auto& cell : cells) {
      if (cell.failed) {
        std::printf("%.2f      %-9s  error: %s\n", cell.fraction,
                    hsc::reduction_name(cell.reduction), cell.error.c_str());
      } else {
        std::printf("%.2f      %-9s  %.4f  %.4f  %.4f\n", cell.fraction,
                    hsc::reduction_name(cell.reduction), cell.se, cell.sp,
                    cell.macc);
      }
    }
  });

  // extract-features
  auto* extract = app.add_subcommand(
      "extract-features", "write per-record MFCC matrices as containers");
  auto extract_paths = std::make_shared<std::vector<std::string>>(2);
  extract->add_option("--data", (*extract_paths)[0], "directory of WAV files")
      ->required();
  extract->add_option("--out", (*extract_paths)[1], "output directory")
      ->required();
  auto extract_cfg = add_config_options(extract);
  extract->callback([extract_paths, extract_cfg] {
    hsc::PipelineConfig config = resolve_config(*extract_cfg);
    int count = hsc::cmd_extract_features((*extract_paths)[0], config,
                                          (*extract_paths)[1]);
    std::printf("wrote %d feature files to %s\n", count,
                (*extract_paths)[1].c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
