// hsc/ivector.h
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

#ifndef HSC_IVECTOR_H_
#define HSC_IVECTOR_H_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hsc/gmm.h"

namespace hsc {

// Soft counts and mean-centered first-order sums of one record against the
// UBM.  f rows are already centered by the UBM means, so downstream algebra
// never re-subtracts them.
struct BaumWelchStats {
  Eigen::VectorXd n;  // C, each >= 0, sums to the frame count
  Eigen::MatrixXd f;  // C x D
};

// Low-rank factor model over GMM mean supervectors: a record's supervector
// is m + T w with w standard normal a priori.  Supervectors stack the C
// per-component blocks of length D in component order.
struct TotalVariabilityModel {
  Eigen::MatrixXd t;               // (C*D) x R
  Eigen::VectorXd ubm_means;       // C*D
  Eigen::VectorXd ubm_variances;   // C*D, strictly positive
  int components = 0;
  int feat_dim = 0;

  int rank() const { return static_cast<int>(t.cols()); }
  auto t_block(int c) const { return t.middleRows(c * feat_dim, feat_dim); }
  auto mean_block(int c) const {
    return ubm_means.segment(c * feat_dim, feat_dim);
  }
  auto variance_block(int c) const {
    return ubm_variances.segment(c * feat_dim, feat_dim);
  }
};

// Gaussian posterior of the latent factor given one record's statistics.
struct IVectorPosterior {
  Eigen::VectorXd mean;           // R
  Eigen::MatrixXd covariance;     // R x R, symmetric positive definite
  Eigen::MatrixXd second_moment;  // covariance + mean * mean^t
};

struct TvOptions {
  int rank = 100;
  int iterations = 5;
  uint64_t seed = 42;
};

// residual[i] is sum_records sum_c |F_c - N_c T_c E[w]|^2 right after
// iteration i's factor update.  residual_monotonic clears when any step
// increases it by more than 1e-6 relative.
struct TvTrace {
  std::vector<double> residual;
  bool residual_monotonic = true;
  int skipped_components = 0;
};

// Accumulates N_c and centered F_c over all frames.  Blocked like the GMM
// accumulators, so the result is thread-count independent.
BaumWelchStats accumulate_stats(const Gmm& ubm, const Eigen::MatrixXd& frames);

// Frame-by-frame reference for the blocked accumulator.
BaumWelchStats accumulate_stats_serial(const Gmm& ubm,
                                       const Eigen::MatrixXd& frames);

// Per-record statistics in input order, records processed in parallel.
std::vector<BaumWelchStats> accumulate_stats_batch(
    const Gmm& ubm, const std::vector<Eigen::MatrixXd>& features);

// Posterior of w for one record: precision I + sum_c N_c T_c^t S_c^-1 T_c,
// mean from the matched linear term.  Solved by Cholesky, never by explicit
// inversion of the precision.
IVectorPosterior posterior_wi(const TotalVariabilityModel& model,
                              const BaumWelchStats& stats);

// One maximization step for T.  Component blocks with zero total occupancy
// keep their current rows; skipped_components, when given, receives how
// many were left unchanged.
Eigen::MatrixXd update_t(const TotalVariabilityModel& model,
                         const std::vector<BaumWelchStats>& stat_list,
                         const std::vector<IVectorPosterior>& posterior_list,
                         int* skipped_components = nullptr);

// Seeded random init of T (0.1 times the mean UBM standard deviation),
// then alternating posterior and update passes.  rank must not exceed C*D.
TotalVariabilityModel train_tv(const Gmm& ubm,
                               const std::vector<BaumWelchStats>& stat_list,
                               const TvOptions& options,
                               TvTrace* trace = nullptr);

// The i-vector: posterior mean of w.
Eigen::VectorXd extract_ivector(const TotalVariabilityModel& model,
                                const BaumWelchStats& stats);

// Rows are per-record i-vectors in input order, extracted in parallel.
Eigen::MatrixXd extract_ivectors(const TotalVariabilityModel& model,
                                 const std::vector<BaumWelchStats>& stat_list);

}  // namespace hsc

#endif  // HSC_IVECTOR_H_
