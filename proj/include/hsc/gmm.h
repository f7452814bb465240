// hsc/gmm.h
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

#ifndef HSC_GMM_H_
#define HSC_GMM_H_

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hsc {

// Diagonal-covariance Gaussian mixture.  Rows of means/variances are
// components; variances hold per-dimension sigma^2, never full covariances.
struct Gmm {
  Eigen::VectorXd weights;    // K, sums to 1
  Eigen::MatrixXd means;      // K x D
  Eigen::MatrixXd variances;  // K x D, strictly positive

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(means.cols()); }
};

struct EmOptions {
  int iterations = 10;
  int kmeans_iterations = 5;
  uint64_t seed = 42;
  // Per-dimension variance floor, as a fraction of the global data variance.
  double variance_floor_scale = 1e-4;
};

// Per-iteration diagnostics from em_fit.  avg_log_likelihood[i] is measured
// under the model entering iteration i, so EM guarantees it non-decreasing
// unless a component was reinitialized.
struct EmTrace {
  std::vector<double> avg_log_likelihood;
  int reinitialized_components = 0;
};

// Zeroth/first/second order sufficient statistics plus the total frame
// log-likelihood accumulated alongside them.
struct EmAccum {
  Eigen::VectorXd n;        // K
  Eigen::MatrixXd sum_x;    // K x D
  Eigen::MatrixXd sum_xx;   // K x D
  double log_likelihood = 0.0;
};

// Vertically concatenates per-record feature matrices; all must share the
// same column count.
Eigen::MatrixXd stack_rows(const std::vector<Eigen::MatrixXd>& blocks);

// Per-frame, per-component log(w_c) + log N(x | m_c, diag(v_c)).
// frames is T x D; the result is T x K.
Eigen::MatrixXd component_log_likelihoods(const Gmm& gmm,
                                          const Eigen::MatrixXd& frames);

// Total mixture log-density of a single frame.
double gmm_log_pdf(const Gmm& gmm, const Eigen::VectorXd& x);

// Sum of per-frame mixture log-densities over all rows.
double gmm_total_log_pdf(const Gmm& gmm, const Eigen::MatrixXd& frames);

// Component responsibilities for each frame; rows sum to 1.  T x K.
Eigen::MatrixXd posterior_matrix(const Gmm& gmm,
                                 const Eigen::MatrixXd& frames);

// E-step statistics over all frames.  Partial sums are formed over
// fixed-size row blocks and merged in block order, so the result does not
// depend on the number of threads.
EmAccum accumulate_em_stats(const Gmm& gmm, const Eigen::MatrixXd& frames);

// Single-pass reference accumulator used to cross-check the blocked one.
EmAccum accumulate_em_stats_serial(const Gmm& gmm,
                                   const Eigen::MatrixXd& frames);

// Fits a K-component mixture to frames (T x D) with k-means++ seeding,
// a few Lloyd refinement passes, then EM.  Components whose posterior mass
// collapses are restarted at a random frame and counted in the trace.
Gmm em_fit(const Eigen::MatrixXd& frames, int components,
           const EmOptions& options, EmTrace* trace = nullptr);

// Fits one mixture per class from the same options (and the same seed), so
// swapping identical inputs yields identical models.
std::pair<Gmm, Gmm> train_class_gmms(const Eigen::MatrixXd& normal_frames,
                                     const Eigen::MatrixXd& abnormal_frames,
                                     int components, const EmOptions& options,
                                     EmTrace* normal_trace = nullptr,
                                     EmTrace* abnormal_trace = nullptr);

// Average per-frame log-likelihood ratio log p(X|normal) - log p(X|abnormal).
// Positive scores favor the normal class.
double llr_score(const Gmm& normal_model, const Gmm& abnormal_model,
                 const Eigen::MatrixXd& frames);

}  // namespace hsc

#endif  // HSC_GMM_H_
