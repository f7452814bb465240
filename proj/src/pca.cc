// src/pca.cc
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

#include "hsc/pca.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "hsc/error.h"

namespace hsc {

PcaModel pca_fit(const Eigen::MatrixXd& data, int l) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (n < 2) {
    throw InvalidInputError("pca_fit: need at least 2 samples, got " +
                            std::to_string(n));
  }
  const Eigen::Index max_l = std::min<Eigen::Index>(n - 1, p);
  if (l < 1 || l > max_l) {
    throw ConfigError("pca_fit: output dimension " + std::to_string(l) +
                      " outside [1, " + std::to_string(max_l) + "] for " +
                      std::to_string(n) + " samples of dimension " +
                      std::to_string(p));
  }

  PcaModel model;
  model.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw NumericError("pca_fit: eigendecomposition failed");
  }

  // Eigen reports eigenvalues ascending; take the trailing l, reversed.
  model.components.resize(p, l);
  model.eigenvalues.resize(l);
  for (int k = 0; k < l; ++k) {
    const Eigen::Index src = p - 1 - k;
    model.eigenvalues(k) = solver.eigenvalues()(src);
    Eigen::VectorXd axis = solver.eigenvectors().col(src);
    Eigen::Index top = 0;
    axis.cwiseAbs().maxCoeff(&top);
    if (axis(top) < 0.0) axis = -axis;
    model.components.col(k) = axis;
  }
  return model;
}

Eigen::VectorXd pca_project(const PcaModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.mean.size()) {
    throw DimensionError("pca_project: input has " + std::to_string(x.size()) +
                         " dims, model expects " +
                         std::to_string(model.mean.size()));
  }
  return model.components.transpose() * (x - model.mean);
}

Eigen::MatrixXd pca_project_rows(const PcaModel& model,
                                 const Eigen::MatrixXd& data) {
  if (data.cols() != model.mean.size()) {
    throw DimensionError("pca_project_rows: input has " +
                         std::to_string(data.cols()) + " dims, model expects " +
                         std::to_string(model.mean.size()));
  }
  return (data.rowwise() - model.mean.transpose()) * model.components;
}

}  // namespace hsc
