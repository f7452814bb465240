// bench/bench_main.cc
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
//
// Times the OpenMP-parallel accumulation kernels against their serial
// reference implementations and reports the largest element-wise difference.
// The blocked kernels merge fixed-size partials in block order, so the
// difference column should read exactly 0 at any thread count.

#include <chrono>
#include <cstdio>
#include <vector>

#include <CLI11.hpp>

#include "hsc/gmm.h"
#include "hsc/ivector.h"
#include "hsc/mfcc.h"
#include "hsc/parallel.h"
#include "hsc/rng.h"

namespace {

double sink = 0.0;  // keeps results observable so timed calls are not elided

template <typename Fn>
double time_best_ms(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (ms < best) best = ms;
  }
  return best;
}

void print_row(const char* name, double serial_ms, double one_ms,
               double many_ms, double diff) {
  std::printf("%-18s %10.2f %12.2f %12.2f %8.2fx %11.3g\n", name, serial_ms,
              one_ms, many_ms, many_ms > 0 ? serial_ms / many_ms : 0.0, diff);
}

hsc::Gmm random_gmm(int components, int dim, hsc::Rng& rng) {
  hsc::Gmm gmm;
  gmm.weights = Eigen::VectorXd(components);
  gmm.means = Eigen::MatrixXd(components, dim);
  gmm.variances = Eigen::MatrixXd(components, dim);
  for (int k = 0; k < components; ++k) {
    gmm.weights[k] = 0.5 + rng.uniform();
    for (int d = 0; d < dim; ++d) {
      gmm.means(k, d) = 2.0 * rng.normal();
      gmm.variances(k, d) = 0.5 + rng.uniform();
    }
  }
  gmm.weights /= gmm.weights.sum();
  return gmm;
}

}  // namespace

int main(int argc, char** argv) {
  int frames = 40000;
  int components = 32;
  int dim = 12;
  int reps = 3;
  int records = 64;

  CLI::App app{"serial versus blocked-parallel kernel comparison"};
  app.add_option("--frames", frames, "frame count for the accumulators");
  app.add_option("--components", components, "mixture components");
  app.add_option("--dim", dim, "feature dimension");
  app.add_option("--records", records, "record count for batch kernels");
  app.add_option("--reps", reps, "repetitions per timing (best-of)");
  CLI11_PARSE(app, argc, argv);

  const int hw_threads = hsc::max_threads();
  std::printf("threads available: %d, block size: %d\n\n", hw_threads,
              hsc::kAccumBlock);
  std::printf("%-18s %10s %12s %12s %9s %11s\n", "kernel", "serial-ms",
              "1-thread-ms", "n-thread-ms", "speedup", "max|diff|");

  hsc::Rng rng(42);
  hsc::Gmm gmm = random_gmm(components, dim, rng);
  Eigen::MatrixXd data(frames, dim);
  for (int t = 0; t < frames; ++t) {
    for (int d = 0; d < dim; ++d) data(t, d) = rng.normal();
  }

  // GMM E-step accumulation.
  {
    hsc::EmAccum serial_result;
    double serial_ms = time_best_ms(reps, [&] {
      serial_result = hsc::accumulate_em_stats_serial(gmm, data);
      sink += serial_result.log_likelihood;
    });
    hsc::set_threads(1);
    hsc::EmAccum blocked_result;
    double one_ms = time_best_ms(reps, [&] {
      blocked_result = hsc::accumulate_em_stats(gmm, data);
      sink += blocked_result.log_likelihood;
    });
    hsc::set_threads(hw_threads);
    double many_ms = time_best_ms(reps, [&] {
      blocked_result = hsc::accumulate_em_stats(gmm, data);
      sink += blocked_result.log_likelihood;
    });
    double diff = (blocked_result.n - serial_result.n).cwiseAbs().maxCoeff();
    diff = std::max(
        diff, (blocked_result.sum_x - serial_result.sum_x).cwiseAbs().maxCoeff());
    diff = std::max(diff, (blocked_result.sum_xx - serial_result.sum_xx)
                              .cwiseAbs()
                              .maxCoeff());
    print_row("gmm-accumulate", serial_ms, one_ms, many_ms, diff);
  }

  // Zeroth/first-order factor statistics.
  {
    hsc::BaumWelchStats serial_result;
    double serial_ms = time_best_ms(reps, [&] {
      serial_result = hsc::accumulate_stats_serial(gmm, data);
      sink += serial_result.n.sum();
    });
    hsc::set_threads(1);
    hsc::BaumWelchStats blocked_result;
    double one_ms = time_best_ms(reps, [&] {
      blocked_result = hsc::accumulate_stats(gmm, data);
      sink += blocked_result.n.sum();
    });
    hsc::set_threads(hw_threads);
    double many_ms = time_best_ms(reps, [&] {
      blocked_result = hsc::accumulate_stats(gmm, data);
      sink += blocked_result.n.sum();
    });
    double diff = (blocked_result.n - serial_result.n).cwiseAbs().maxCoeff();
    diff = std::max(diff,
                    (blocked_result.f - serial_result.f).cwiseAbs().maxCoeff());
    print_row("factor-stats", serial_ms, one_ms, many_ms, diff);
  }

  // MFCC batch over whole records.
  {
    hsc::MfccConfig config;
    std::vector<hsc::AudioRecord> corpus(static_cast<size_t>(records));
    for (auto& record : corpus) {
      record.sample_rate_hz = config.sample_rate_hz;
      record.samples.resize(static_cast<size_t>(5 * config.sample_rate_hz));
      for (auto& s : record.samples) s = 0.1 * rng.normal();
    }
    std::vector<hsc::FeatureMatrix> serial_result;
    double serial_ms = time_best_ms(reps, [&] {
      serial_result.clear();
      for (const auto& record : corpus) {
        serial_result.push_back(hsc::extract_mfcc(record, config));
      }
      sink += serial_result.back().sum();
    });
    hsc::set_threads(1);
    std::vector<hsc::FeatureMatrix> batch_result;
    double one_ms = time_best_ms(reps, [&] {
      batch_result = hsc::extract_mfcc_batch(corpus, config);
      sink += batch_result.back().sum();
    });
    hsc::set_threads(hw_threads);
    double many_ms = time_best_ms(reps, [&] {
      batch_result = hsc::extract_mfcc_batch(corpus, config);
      sink += batch_result.back().sum();
    });
    double diff = 0.0;
    for (size_t i = 0; i < batch_result.size(); ++i) {
      diff = std::max(
          diff, (batch_result[i] - serial_result[i]).cwiseAbs().maxCoeff());
    }
    print_row("mfcc-batch", serial_ms, one_ms, many_ms, diff);
  }

  // Batch i-vector extraction.
  {
    const int rank = 16;
    hsc::TotalVariabilityModel tv;
    tv.components = components;
    tv.feat_dim = dim;
    tv.ubm_means = Eigen::VectorXd(components * dim);
    tv.ubm_variances = Eigen::VectorXd(components * dim);
    for (int k = 0; k < components; ++k) {
      for (int d = 0; d < dim; ++d) {
        tv.ubm_means[k * dim + d] = gmm.means(k, d);
        tv.ubm_variances[k * dim + d] = gmm.variances(k, d);
      }
    }
    tv.t = Eigen::MatrixXd(components * dim, rank);
    for (int r = 0; r < tv.t.rows(); ++r) {
      for (int c = 0; c < rank; ++c) tv.t(r, c) = 0.05 * rng.normal();
    }
    std::vector<hsc::BaumWelchStats> stats(static_cast<size_t>(records));
    const int frames_per_record = std::max(frames / records, 1);
    for (auto& stat : stats) {
      Eigen::MatrixXd chunk(frames_per_record, dim);
      for (int t = 0; t < frames_per_record; ++t) {
        for (int d = 0; d < dim; ++d) chunk(t, d) = rng.normal();
      }
      stat = hsc::accumulate_stats(gmm, chunk);
    }
    std::vector<Eigen::VectorXd> serial_result(stats.size());
    double serial_ms = time_best_ms(reps, [&] {
      for (size_t i = 0; i < stats.size(); ++i) {
        serial_result[i] = hsc::extract_ivector(tv, stats[i]);
      }
      sink += serial_result.back().sum();
    });
    hsc::set_threads(1);
    Eigen::MatrixXd batch_result;
    double one_ms = time_best_ms(reps, [&] {
      batch_result = hsc::extract_ivectors(tv, stats);
      sink += batch_result.sum();
    });
    hsc::set_threads(hw_threads);
    double many_ms = time_best_ms(reps, [&] {
      batch_result = hsc::extract_ivectors(tv, stats);
      sink += batch_result.sum();
    });
    double diff = 0.0;
    for (size_t i = 0; i < stats.size(); ++i) {
      diff = std::max(diff, (batch_result.row(static_cast<int>(i)).transpose() -
                             serial_result[i])
                                .cwiseAbs()
                                .maxCoeff());
    }
    print_row("ivector-extract", serial_ms, one_ms, many_ms, diff);
  }

  std::printf("\n(sink %.3g)\n", sink);
  return 0;
}
