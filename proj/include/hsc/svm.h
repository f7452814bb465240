// hsc/svm.h
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

#ifndef HSC_SVM_H_
#define HSC_SVM_H_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace hsc {

// Two-class kernel machine.  dual_coeffs holds a_n * t_n for the retained
// support vectors, so decision values are sum_n dual_coeffs_n k(sv_n, x) + b.
// Labels encode Normal as +1 and Abnormal as -1, matching the sign of the
// GMM likelihood-ratio score.
struct SvmModel {
  Eigen::MatrixXd support_vectors;  // m x D
  Eigen::VectorXd dual_coeffs;      // m, each nonzero, |coeff| <= c
  double bias = 0.0;
  double kernel_width = 1.0;        // sigma of the RBF kernel
  double c = 1.0;                   // box constraint the model was fit with
  bool converged = true;

  int count() const { return static_cast<int>(dual_coeffs.size()); }
  int dim() const { return static_cast<int>(support_vectors.cols()); }
};

struct SvmOptions {
  double c = 1.0;
  // sigma <= 0 requests the median heuristic: the median pairwise distance
  // of the training rows.
  double sigma = 0.0;
  double tolerance = 1e-3;
  // Budget of full sweeps over the training set; a sweep with no updates
  // means every point meets the KKT conditions and training stops early.
  int max_passes = 200;
  uint64_t seed = 42;
};

// exp(-|x - x'|^2 / (2 sigma^2)).  sigma must be positive.
double rbf_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                  double sigma);

// Sequential minimal optimization on the RBF dual, pairwise updates only,
// so the equality constraint sum_n a_n t_n = 0 is preserved exactly.
// labels must be +/-1 with both classes present.  Exhausting the sweep
// budget returns the best-effort model with converged cleared.
SvmModel svm_train(const Eigen::MatrixXd& data, const std::vector<int>& labels,
                   const SvmOptions& options);

// Signed decision value; positive favors the +1 (Normal) class.
double svm_decision(const SvmModel& model, const Eigen::VectorXd& x);

// Decision values for every row, computed in parallel.
Eigen::VectorXd svm_decision_rows(const SvmModel& model,
                                  const Eigen::MatrixXd& data);

}  // namespace hsc

#endif  // HSC_SVM_H_
