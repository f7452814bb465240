// tests/test_pipeline.cc
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "hsc/container.h"
#include "hsc/error.h"
#include "hsc/mfcc.h"
#include "hsc/pipeline.h"
#include "hsc/wav.h"
#include "oracles.h"

using namespace hsc;
using namespace hsc::testing;
namespace fs = std::filesystem;

namespace {

// Small but realistic settings so the whole pipeline runs in seconds.
PipelineConfig quick_config() {
  PipelineConfig config;
  config.ubm_components = 8;
  config.ubm_iterations = 3;
  config.ivector_rank = 4;
  config.tv_iterations = 8;
  config.reduction = Reduction::kPca;
  config.reduced_dim = 2;
  config.classifier = Classifier::kGmm;
  config.class_gmm_components = 2;
  config.class_gmm_iterations = 3;
  config.vae_hidden = 4;
  config.vae_epochs = 20;
  return config;
}

}  // namespace

TEST_CASE("train, score, and evaluate a separable toy corpus") {
  TempDir dir("train");
  ToyCorpus corpus = write_toy_corpus(dir, 40, 12.0);
  const std::string bundle_dir = dir.file("bundle");
  PipelineConfig config = quick_config();

  TrainSummary summary =
      cmd_train(corpus.data_dir, corpus.labels_file, config, bundle_dir);
  CHECK(summary.record_count == 40);
  CHECK(summary.normal_count == 20);
  CHECK(summary.abnormal_count == 20);
  CHECK(summary.ubm_trace.avg_log_likelihood.size() == 3);
  CHECK(summary.tv_trace.residual.size() == 8);
  CHECK(summary.tv_trace.residual_monotonic);
  CHECK(summary.class_normal_trace.avg_log_likelihood.size() == 3);

  for (const char* name :
       {"ubm.hsm", "tv.hsm", "pca.hsm", "classifier.hsm", "manifest.json"}) {
    CHECK(fs::exists(fs::path(bundle_dir) / name));
  }
  CHECK_FALSE(fs::exists(fs::path(bundle_dir) / "vae.hsm"));

  SUBCASE("the manifest records config, counts, and diagnostics") {
    std::ifstream in(fs::path(bundle_dir) / "manifest.json");
    nlohmann::json manifest = nlohmann::json::parse(in);
    CHECK(manifest.at("bundle_version").get<int>() == 1);
    CHECK(manifest.at("records").at("total").get<int>() == 40);
    CHECK(manifest.at("records").at("normal").get<int>() == 20);
    CHECK(manifest.at("config").at("ubm_k").get<std::string>() == "8");
    CHECK(manifest.at("config").at("reduce").get<std::string>() == "pca");
    CHECK(manifest.at("config").at("seed").get<std::string>() == "42");
    CHECK(manifest.at("files").at("reduction").get<std::string>() ==
          "pca.hsm");
    CHECK(manifest.at("diagnostics").at("ubm").at("avg_log_likelihood")
              .size() == 3);
    CHECK_FALSE(manifest.contains("timestamp"));
  }

  SUBCASE("scoring separates the classes and evaluation confirms it") {
    const std::string scores_csv = dir.file("scores.csv");
    std::map<std::string, double> scores =
        cmd_score(corpus.data_dir, bundle_dir, scores_csv);
    REQUIRE(scores.size() == 40);
    for (const auto& [id, value] : scores) CHECK(std::isfinite(value));

    const std::string curve_csv = dir.file("curve.csv");
    EvalReport report = cmd_evaluate(scores_csv, corpus.labels_file,
                                     EvalWeights{}, true, 0.0, curve_csv);
    CHECK(report.macc > 0.9);
    CHECK(report.se >= 0.0);
    CHECK(report.sp <= 1.0);
    CHECK(report.curve.size() >= 3);
    CHECK(fs::exists(curve_csv));

    const std::string text = format_report(report);
    CHECK(text.find("\"Se\":") != std::string::npos);
    CHECK(text.find("\"Sp\":") != std::string::npos);
    CHECK(text.find("\"MAcc\":") != std::string::npos);
    CHECK(text.find("\"threshold\":") != std::string::npos);
  }
}

TEST_CASE("the same command twice produces identical bytes") {
  TempDir dir("determinism");
  ToyCorpus corpus = write_toy_corpus(dir, 16);
  PipelineConfig config = quick_config();
  config.ubm_components = 4;
  config.ivector_rank = 3;

  const std::string bundle_a = dir.file("bundle_a");
  const std::string bundle_b = dir.file("bundle_b");
  cmd_train(corpus.data_dir, corpus.labels_file, config, bundle_a);
  cmd_train(corpus.data_dir, corpus.labels_file, config, bundle_b);
  for (const char* name :
       {"ubm.hsm", "tv.hsm", "pca.hsm", "classifier.hsm", "manifest.json"}) {
    CHECK(slurp(dir.file(std::string("bundle_a/") + name)) ==
          slurp(dir.file(std::string("bundle_b/") + name)));
  }

  const std::string csv_a = dir.file("scores_a.csv");
  const std::string csv_b = dir.file("scores_b.csv");
  cmd_score(corpus.data_dir, bundle_a, csv_a);
  cmd_score(corpus.data_dir, bundle_b, csv_b);
  CHECK(slurp(csv_a) == slurp(csv_b));
  CHECK(slurp(csv_a).rfind("record_id,score\n", 0) == 0);
}

TEST_CASE("a record without a label aborts naming the record") {
  TempDir dir("missing-label");
  ToyCorpus corpus = write_toy_corpus(dir, 8);
  // Rewrite the reference without its first data row.
  std::string all = slurp(corpus.labels_file);
  const std::string victim = all.substr(0, all.find(','));
  std::ofstream out(corpus.labels_file, std::ios::trunc);
  out << all.substr(all.find('\n') + 1);
  out.close();

  try {
    cmd_train(corpus.data_dir, corpus.labels_file, quick_config(),
              dir.file("bundle"));
    FAIL("expected an error naming the unlabeled record");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(victim) != std::string::npos);
  }
}

TEST_CASE("scoring an empty directory warns and writes only the header") {
  TempDir dir("empty-score");
  ToyCorpus corpus = write_toy_corpus(dir, 12);
  PipelineConfig config = quick_config();
  config.ubm_components = 4;
  config.ivector_rank = 2;
  config.reduction = Reduction::kNone;
  const std::string bundle_dir = dir.file("bundle");
  cmd_train(corpus.data_dir, corpus.labels_file, config, bundle_dir);

  const std::string empty_dir = dir.file("nothing");
  fs::create_directories(empty_dir);
  const std::string csv = dir.file("scores.csv");
  std::map<std::string, double> scores = cmd_score(empty_dir, bundle_dir, csv);
  CHECK(scores.empty());
  CHECK(slurp(csv) == "record_id,score\n");

  SUBCASE("a bundle with a mismatched stage is rejected") {
    // An 8-dim UBM cannot feed 12-dim features.
    Rng rng(131);
    Gmm wrong = random_gmm(4, 8, rng);
    save_model(wrong, (fs::path(bundle_dir) / "ubm.hsm").string());
    CHECK_THROWS_AS(cmd_score(corpus.data_dir, bundle_dir, ""),
                    IncompatibleModelError);
  }
  SUBCASE("a truncated manifest is a format error") {
    std::ofstream out(fs::path(bundle_dir) / "manifest.json",
                      std::ios::trunc);
    out << "{\"bundle_version\": 1";
    out.close();
    CHECK_THROWS_AS(cmd_score(corpus.data_dir, bundle_dir, ""), FormatError);
  }
}

TEST_CASE("feature extraction writes one container per record") {
  TempDir dir("features");
  ToyCorpus corpus = write_toy_corpus(dir, 6);
  PipelineConfig config = quick_config();
  const std::string out_dir = dir.file("feats");
  CHECK(cmd_extract_features(corpus.data_dir, config, out_dir) == 6);

  int count = 0;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    CHECK(entry.path().extension() == ".hsm");
    ++count;
  }
  CHECK(count == 6);

  // Spot-check one record against direct extraction.
  const std::string id = "a0001";
  AudioRecord record =
      load_wav((fs::path(corpus.data_dir) / (id + ".wav")).string());
  record.record_id = id;
  FeatureMatrix direct = extract_mfcc(record, config.mfcc);
  Eigen::MatrixXd stored =
      load_feature_matrix((fs::path(out_dir) / (id + ".hsm")).string());
  CHECK((stored.array() == direct.array()).all());
}

TEST_CASE("the ablation grid covers fractions crossed with reductions") {
  TempDir dir("ablate");
  ToyCorpus corpus = write_toy_corpus(dir, 24);
  PipelineConfig config = quick_config();
  config.ubm_components = 4;
  config.ivector_rank = 3;
  config.reduced_dim = 2;
  config.folds = 2;

  const std::string csv = dir.file("ablation.csv");
  std::vector<AblationCell> cells =
      cmd_ablate(corpus.data_dir, corpus.labels_file, config, csv);
  REQUIRE(cells.size() == 6);
  const Reduction expected_reduction[] = {Reduction::kNone, Reduction::kPca,
                                          Reduction::kVae};
  for (int i = 0; i < 6; ++i) {
    CHECK(cells[static_cast<std::size_t>(i)].fraction ==
          doctest::Approx(i < 3 ? 0.5 : 1.0));
    CHECK(cells[static_cast<std::size_t>(i)].reduction ==
          expected_reduction[i % 3]);
    // Stratified splits keep both classes in every partition, so no cell
    // has an excuse to fail on this corpus.
    const auto& cell = cells[static_cast<std::size_t>(i)];
    CHECK_FALSE(cell.failed);
    CHECK(cell.error.empty());
    CHECK(cell.macc >= 0.0);
    CHECK(cell.macc <= 1.0);
  }
  const std::string table = slurp(csv);
  CHECK(table.rfind("fraction,reduction,se,sp,macc\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 7);
  CHECK(table.find("error") == std::string::npos);
}

TEST_CASE("fixed-threshold evaluation matches the metric primitives") {
  TempDir dir("evaluate");
  const std::string scores_csv = dir.file("scores.csv");
  const std::string labels_csv = dir.file("reference.csv");
  std::map<std::string, double> scores{
      {"r1", 0.9}, {"r2", -0.4}, {"r3", 0.1}, {"r4", -0.8}, {"r5", 0.3}};
  write_scores(scores, scores_csv);
  {
    std::ofstream out(labels_csv);
    out << "r1,-1\nr2,1\nr3,1,p\nr4,1\nr5,-1\n";
  }
  EvalReport report = cmd_evaluate(scores_csv, labels_csv, EvalWeights{},
                                   false, 0.0, "");
  LabelTable truth = load_reference(labels_csv);
  auto [se, sp] =
      compute_se_sp(tally_confusion(apply_threshold(scores, 0.0), truth),
                    EvalWeights{});
  CHECK(report.se == doctest::Approx(se).epsilon(1e-14));
  CHECK(report.sp == doctest::Approx(sp).epsilon(1e-14));
  CHECK(report.macc == doctest::Approx(compute_macc(se, sp)).epsilon(1e-14));
  CHECK(report.threshold == 0.0);
  CHECK(report.curve.empty());

  SUBCASE("a missing scores file is an error") {
    CHECK_THROWS_AS(cmd_evaluate(dir.file("absent.csv"), labels_csv,
                                 EvalWeights{}, false, 0.0, ""),
                    Error);
  }
}
