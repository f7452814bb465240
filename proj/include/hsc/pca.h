// hsc/pca.h
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

#ifndef HSC_PCA_H_
#define HSC_PCA_H_

#include <Eigen/Dense>

namespace hsc {

// Principal axes of a training set.  Columns of components are orthonormal
// and ordered by non-increasing eigenvalue; each column's largest-magnitude
// entry is positive, pinning the sign.
struct PcaModel {
  Eigen::VectorXd mean;        // p
  Eigen::MatrixXd components;  // p x l
  Eigen::VectorXd eigenvalues; // l, non-increasing

  int input_dim() const { return static_cast<int>(mean.size()); }
  int output_dim() const { return static_cast<int>(components.cols()); }
};

// Fits the top-l principal axes of data (n x p rows are samples) from the
// sample covariance (1/(n-1) normalization).  Requires n >= 2 and
// 1 <= l <= min(n-1, p).
PcaModel pca_fit(const Eigen::MatrixXd& data, int l);

// Centered projection (x - mean) onto each axis.
Eigen::VectorXd pca_project(const PcaModel& model, const Eigen::VectorXd& x);

// Projects every row; returns n x l.
Eigen::MatrixXd pca_project_rows(const PcaModel& model,
                                 const Eigen::MatrixXd& data);

}  // namespace hsc

#endif  // HSC_PCA_H_
