// src/svm.cc
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

#include "hsc/svm.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "hsc/error.h"
#include "hsc/parallel.h"
#include "hsc/rng.h"

namespace hsc {

namespace {

// Steps smaller than this count as no progress for the working pair.
constexpr double kMinStep = 1e-12;

Eigen::MatrixXd pairwise_squared_distances(const Eigen::MatrixXd& data) {
  const Eigen::VectorXd sq = data.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * (data * data.transpose());
  d2.colwise() += sq;
  d2.rowwise() += sq.transpose();
  return d2.cwiseMax(0.0);
}

double median_pairwise_distance(const Eigen::MatrixXd& d2) {
  const Eigen::Index n = d2.rows();
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist.push_back(std::sqrt(d2(i, j)));
    }
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<long>(mid),
                   dist.end());
  return dist[mid];
}

}  // namespace

double rbf_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                  double sigma) {
  if (!(sigma > 0.0)) {
    throw ConfigError("rbf_kernel: kernel width must be positive, got " +
                      std::to_string(sigma));
  }
  if (x.size() != y.size()) {
    throw DimensionError("rbf_kernel: operands have " +
                         std::to_string(x.size()) + " and " +
                         std::to_string(y.size()) + " dims");
  }
  return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

SvmModel svm_train(const Eigen::MatrixXd& data, const std::vector<int>& labels,
                   const SvmOptions& options) {
  const Eigen::Index n = data.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw DimensionError("svm_train: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(n) + " rows");
  }
  if (n < 2) {
    throw InvalidInputError("svm_train: need at least 2 training rows");
  }
  bool saw_pos = false;
  bool saw_neg = false;
  for (int label : labels) {
    if (label == 1) {
      saw_pos = true;
    } else if (label == -1) {
      saw_neg = true;
    } else {
      throw InvalidInputError("svm_train: labels must be +1 or -1, got " +
                              std::to_string(label));
    }
  }
  if (!saw_pos || !saw_neg) {
    throw InvalidInputError("svm_train: both classes must be present");
  }
  if (!(options.c > 0.0)) {
    throw ConfigError("svm_train: box constraint must be positive");
  }
  if (!(options.tolerance > 0.0) || options.max_passes < 1) {
    throw ConfigError("svm_train: bad tolerance or sweep budget");
  }

  const Eigen::MatrixXd d2 = pairwise_squared_distances(data);
  double sigma = options.sigma;
  if (!(sigma > 0.0)) {
    sigma = median_pairwise_distance(d2);
    // Duplicate-heavy data can drive the median to zero.
    if (!(sigma > 0.0)) sigma = 1.0;
  }
  const Eigen::MatrixXd kernel =
      (d2 / (-2.0 * sigma * sigma)).array().exp();

  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i) = static_cast<double>(labels[static_cast<std::size_t>(i)]);
  }

  const double c = options.c;
  const double tol = options.tolerance;
  Rng rng(options.seed);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  double bias = 0.0;
  // errors(i) = f(x_i) - t_i, maintained incrementally after every step.
  Eigen::VectorXd errors = -t;

  // Joint step on the pair (i, j); true once alpha actually moved.
  auto try_step = [&](Eigen::Index i, Eigen::Index j) -> bool {
    if (i == j) return false;
    const double e_i = errors(i);
    const double e_j = errors(j);
    const double alpha_i_old = alpha(i);
    const double alpha_j_old = alpha(j);
    double low, high;
    if (t(i) != t(j)) {
      low = std::max(0.0, alpha_j_old - alpha_i_old);
      high = std::min(c, c + alpha_j_old - alpha_i_old);
    } else {
      low = std::max(0.0, alpha_i_old + alpha_j_old - c);
      high = std::min(c, alpha_i_old + alpha_j_old);
    }
    if (low >= high) return false;

    const double eta = 2.0 * kernel(i, j) - kernel(i, i) - kernel(j, j);
    if (eta >= 0.0) return false;

    double alpha_j = alpha_j_old - t(j) * (e_i - e_j) / eta;
    alpha_j = std::clamp(alpha_j, low, high);
    if (std::abs(alpha_j - alpha_j_old) < kMinStep) return false;
    const double alpha_i =
        alpha_i_old + t(i) * t(j) * (alpha_j_old - alpha_j);
    alpha(i) = alpha_i;
    alpha(j) = alpha_j;

    const double delta_i = t(i) * (alpha_i - alpha_i_old);
    const double delta_j = t(j) * (alpha_j - alpha_j_old);
    const double b1 = bias - e_i - delta_i * kernel(i, i) -
                      delta_j * kernel(i, j);
    const double b2 = bias - e_j - delta_i * kernel(i, j) -
                      delta_j * kernel(j, j);
    double bias_new;
    if (alpha_i > 0.0 && alpha_i < c) {
      bias_new = b1;
    } else if (alpha_j > 0.0 && alpha_j < c) {
      bias_new = b2;
    } else {
      bias_new = 0.5 * (b1 + b2);
    }
    errors += delta_i * kernel.col(i) + delta_j * kernel.col(j);
    errors.array() += bias_new - bias;
    bias = bias_new;
    return true;
  };

  bool converged = false;
  for (int pass = 0; pass < options.max_passes && !converged; ++pass) {
    int changed = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r_i = errors(i) * t(i);
      const bool violates =
          (r_i < -tol && alpha(i) < c) || (r_i > tol && alpha(i) > 0.0);
      if (!violates) continue;

      // Second choice: the point whose error differs most from e_i, which
      // maximizes the unconstrained step size.
      Eigen::Index j = -1;
      double best_gap = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k == i) continue;
        const double gap = std::abs(errors(i) - errors(k));
        if (gap > best_gap) {
          best_gap = gap;
          j = k;
        }
      }
      if (j >= 0 && try_step(i, j)) {
        ++changed;
        continue;
      }
      // Clipping or a flat pair can stall the heuristic choice while other
      // partners still admit progress, so sweep the rest from a seeded
      // random start before giving up on this point.
      const Eigen::Index start =
          static_cast<Eigen::Index>(rng.integer(static_cast<uint64_t>(n)));
      for (Eigen::Index off = 0; off < n; ++off) {
        const Eigen::Index k = (start + off) % n;
        if (k == i || k == j) continue;
        if (try_step(i, k)) {
          ++changed;
          break;
        }
      }
    }
    // A clean sweep means no pair admits a step, which with violations
    // gated at tol leaves every point within tolerance of the KKT
    // conditions.
    if (changed == 0) converged = true;
  }

  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha(i) > 0.0) kept.push_back(i);
  }
  SvmModel model;
  model.support_vectors.resize(static_cast<Eigen::Index>(kept.size()),
                               data.cols());
  model.dual_coeffs.resize(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t m = 0; m < kept.size(); ++m) {
    model.support_vectors.row(static_cast<Eigen::Index>(m)) =
        data.row(kept[m]);
    model.dual_coeffs(static_cast<Eigen::Index>(m)) =
        alpha(kept[m]) * t(kept[m]);
  }
  model.bias = bias;
  model.kernel_width = sigma;
  model.c = c;
  model.converged = converged;
  return model;
}

double svm_decision(const SvmModel& model, const Eigen::VectorXd& x) {
  if (model.count() > 0 && x.size() != model.support_vectors.cols()) {
    throw DimensionError("svm_decision: input has " +
                         std::to_string(x.size()) + " dims, model expects " +
                         std::to_string(model.support_vectors.cols()));
  }
  double value = model.bias;
  const double denom = 2.0 * model.kernel_width * model.kernel_width;
  for (int m = 0; m < model.count(); ++m) {
    const double d2 =
        (model.support_vectors.row(m).transpose() - x).squaredNorm();
    value += model.dual_coeffs(m) * std::exp(-d2 / denom);
  }
  return value;
}

Eigen::VectorXd svm_decision_rows(const SvmModel& model,
                                  const Eigen::MatrixXd& data) {
  Eigen::VectorXd out(data.rows());
  parallel_for(static_cast<int>(data.rows()), [&](int i) {
    out(i) = svm_decision(model, data.row(i).transpose());
  });
  return out;
}

}  // namespace hsc
