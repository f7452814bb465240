// src/gmm.cc
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

#include "hsc/gmm.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hsc/error.h"
#include "hsc/parallel.h"
#include "hsc/rng.h"

namespace hsc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

// Mass below this fraction of the frame count marks a component degenerate.
constexpr double kDegenerateMass = 1e-8;

void check_frames(const Gmm& gmm, const Eigen::MatrixXd& frames,
                  const char* who) {
  if (frames.rows() == 0) {
    throw InvalidInputError(std::string(who) + ": no frames");
  }
  if (frames.cols() != gmm.dim()) {
    throw DimensionError(std::string(who) + ": frames have " +
                         std::to_string(frames.cols()) +
                         " dims but the model expects " +
                         std::to_string(gmm.dim()));
  }
}

double log_sum_exp_row(const Eigen::RowVectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// Row-wise log-sum-exp of a T x K matrix.
Eigen::VectorXd log_sum_exp_rows(const Eigen::MatrixXd& ll) {
  Eigen::VectorXd out(ll.rows());
  for (Eigen::Index t = 0; t < ll.rows(); ++t) {
    out(t) = log_sum_exp_row(ll.row(t));
  }
  return out;
}

// Statistics of one contiguous row block, all sums taken in row order.
EmAccum block_stats(const Gmm& gmm, const Eigen::MatrixXd& frames, int begin,
                    int end) {
  const int k = gmm.components();
  const int d = gmm.dim();
  EmAccum acc;
  acc.n = Eigen::VectorXd::Zero(k);
  acc.sum_x = Eigen::MatrixXd::Zero(k, d);
  acc.sum_xx = Eigen::MatrixXd::Zero(k, d);

  const auto block = frames.middleRows(begin, end - begin);
  const Eigen::MatrixXd ll = component_log_likelihoods(gmm, block);
  const Eigen::VectorXd lse = log_sum_exp_rows(ll);
  const Eigen::MatrixXd gamma = (ll.colwise() - lse).array().exp();

  acc.log_likelihood = lse.sum();
  acc.n = gamma.colwise().sum().transpose();
  acc.sum_x = gamma.transpose() * block;
  acc.sum_xx = gamma.transpose() * block.array().square().matrix();
  return acc;
}

void merge_into(EmAccum& total, const EmAccum& part) {
  total.n += part.n;
  total.sum_x += part.sum_x;
  total.sum_xx += part.sum_xx;
  total.log_likelihood += part.log_likelihood;
}

// Squared distance from every frame to its nearest center, plus the index
// of that center.
void nearest_centers(const Eigen::MatrixXd& frames,
                     const Eigen::MatrixXd& centers,
                     std::vector<int>* assignment, Eigen::VectorXd* dist2) {
  const Eigen::Index t_count = frames.rows();
  assignment->assign(static_cast<std::size_t>(t_count), 0);
  dist2->resize(t_count);
  for (Eigen::Index t = 0; t < t_count; ++t) {
    int best = 0;
    double best_d = (frames.row(t) - centers.row(0)).squaredNorm();
    for (Eigen::Index c = 1; c < centers.rows(); ++c) {
      const double d = (frames.row(t) - centers.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    (*assignment)[static_cast<std::size_t>(t)] = best;
    (*dist2)(t) = best_d;
  }
}

Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& frames, int k, Rng& rng) {
  const Eigen::Index t_count = frames.rows();
  Eigen::MatrixXd centers(k, frames.cols());
  centers.row(0) =
      frames.row(static_cast<Eigen::Index>(rng.integer(
          static_cast<uint64_t>(t_count))));

  Eigen::VectorXd dist2 =
      (frames.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      // Sample a frame with probability proportional to its squared
      // distance from the chosen centers.
      double r = rng.uniform() * total;
      for (Eigen::Index t = 0; t < t_count; ++t) {
        r -= dist2(t);
        if (r <= 0.0) {
          pick = t;
          break;
        }
        pick = t;
      }
    } else {
      pick = static_cast<Eigen::Index>(
          rng.integer(static_cast<uint64_t>(t_count)));
    }
    centers.row(c) = frames.row(pick);
    dist2 = dist2.cwiseMin(
        (frames.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

Eigen::MatrixXd stack_rows(const std::vector<Eigen::MatrixXd>& blocks) {
  if (blocks.empty()) {
    throw InvalidInputError("stack_rows: no matrices to stack");
  }
  const Eigen::Index cols = blocks.front().cols();
  Eigen::Index rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != cols) {
      throw DimensionError("stack_rows: column counts differ (" +
                           std::to_string(b.cols()) + " vs " +
                           std::to_string(cols) + ")");
    }
    rows += b.rows();
  }
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return out;
}

Eigen::MatrixXd component_log_likelihoods(const Gmm& gmm,
                                          const Eigen::MatrixXd& frames) {
  const int k = gmm.components();
  const int d = gmm.dim();
  if (frames.cols() != d) {
    throw DimensionError("component_log_likelihoods: frames have " +
                         std::to_string(frames.cols()) +
                         " dims but the model expects " + std::to_string(d));
  }

  // log w_c - 0.5 * sum_d log(2*pi*v_cd), constant per component.
  Eigen::VectorXd offset(k);
  for (int c = 0; c < k; ++c) {
    offset(c) = std::log(gmm.weights(c)) -
                0.5 * (gmm.variances.row(c).array().log() + kLog2Pi).sum();
  }

  Eigen::MatrixXd ll(frames.rows(), k);
  for (int c = 0; c < k; ++c) {
    const Eigen::ArrayXXd centered =
        (frames.rowwise() - gmm.means.row(c)).array();
    ll.col(c) =
        (centered.square().rowwise() * gmm.variances.row(c).array().inverse())
            .rowwise()
            .sum()
            .matrix() *
        -0.5;
    ll.col(c).array() += offset(c);
  }
  return ll;
}

double gmm_log_pdf(const Gmm& gmm, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd ll =
      component_log_likelihoods(gmm, x.transpose());
  return log_sum_exp_row(ll.row(0));
}

double gmm_total_log_pdf(const Gmm& gmm, const Eigen::MatrixXd& frames) {
  check_frames(gmm, frames, "gmm_total_log_pdf");
  return log_sum_exp_rows(component_log_likelihoods(gmm, frames)).sum();
}

Eigen::MatrixXd posterior_matrix(const Gmm& gmm,
                                 const Eigen::MatrixXd& frames) {
  check_frames(gmm, frames, "posterior_matrix");
  const Eigen::MatrixXd ll = component_log_likelihoods(gmm, frames);
  const Eigen::VectorXd lse = log_sum_exp_rows(ll);
  return (ll.colwise() - lse).array().exp();
}

EmAccum accumulate_em_stats(const Gmm& gmm, const Eigen::MatrixXd& frames) {
  check_frames(gmm, frames, "accumulate_em_stats");
  const int t_count = static_cast<int>(frames.rows());
  const int blocks = block_count(t_count, kAccumBlock);
  std::vector<EmAccum> parts(static_cast<std::size_t>(blocks));
  parallel_blocks(t_count, [&](int block, int begin, int end) {
    parts[static_cast<std::size_t>(block)] =
        block_stats(gmm, frames, begin, end);
  });

  EmAccum total;
  total.n = Eigen::VectorXd::Zero(gmm.components());
  total.sum_x = Eigen::MatrixXd::Zero(gmm.components(), gmm.dim());
  total.sum_xx = Eigen::MatrixXd::Zero(gmm.components(), gmm.dim());
  for (const auto& part : parts) merge_into(total, part);
  return total;
}

EmAccum accumulate_em_stats_serial(const Gmm& gmm,
                                   const Eigen::MatrixXd& frames) {
  check_frames(gmm, frames, "accumulate_em_stats_serial");
  const int k = gmm.components();
  const int d = gmm.dim();
  EmAccum acc;
  acc.n = Eigen::VectorXd::Zero(k);
  acc.sum_x = Eigen::MatrixXd::Zero(k, d);
  acc.sum_xx = Eigen::MatrixXd::Zero(k, d);
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    const Eigen::MatrixXd ll =
        component_log_likelihoods(gmm, frames.row(t));
    const double lse = log_sum_exp_row(ll.row(0));
    acc.log_likelihood += lse;
    for (int c = 0; c < k; ++c) {
      const double g = std::exp(ll(0, c) - lse);
      acc.n(c) += g;
      acc.sum_x.row(c) += g * frames.row(t);
      acc.sum_xx.row(c) += g * frames.row(t).array().square().matrix();
    }
  }
  return acc;
}

Gmm em_fit(const Eigen::MatrixXd& frames, int components,
           const EmOptions& options, EmTrace* trace) {
  if (components < 1) {
    throw ConfigError("em_fit: component count must be positive");
  }
  if (frames.rows() < components) {
    throw InvalidInputError("em_fit: " + std::to_string(frames.rows()) +
                            " frames cannot support " +
                            std::to_string(components) + " components");
  }
  const Eigen::Index t_count = frames.rows();
  const int d = static_cast<int>(frames.cols());
  Rng rng(options.seed);

  const Eigen::RowVectorXd global_mean = frames.colwise().mean();
  const Eigen::RowVectorXd global_var =
      (frames.rowwise() - global_mean).array().square().colwise().mean();
  // The floor also guards dimensions that are globally constant.
  const Eigen::RowVectorXd floor =
      (global_var * options.variance_floor_scale)
          .cwiseMax(std::numeric_limits<double>::min());

  Eigen::MatrixXd centers = kmeanspp_seed(frames, components, rng);
  std::vector<int> assignment;
  Eigen::VectorXd dist2;
  for (int it = 0; it < options.kmeans_iterations; ++it) {
    nearest_centers(frames, centers, &assignment, &dist2);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(components, d);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(components);
    for (Eigen::Index t = 0; t < t_count; ++t) {
      sums.row(assignment[static_cast<std::size_t>(t)]) += frames.row(t);
      counts(assignment[static_cast<std::size_t>(t)]) += 1.0;
    }
    for (int c = 0; c < components; ++c) {
      if (counts(c) > 0.0) {
        centers.row(c) = sums.row(c) / counts(c);
      } else {
        centers.row(c) = frames.row(static_cast<Eigen::Index>(
            rng.integer(static_cast<uint64_t>(t_count))));
      }
    }
  }

  // Mixture initialization from the final hard assignment.
  nearest_centers(frames, centers, &assignment, &dist2);
  Gmm gmm;
  gmm.weights = Eigen::VectorXd::Zero(components);
  gmm.means = centers;
  gmm.variances = Eigen::MatrixXd::Zero(components, d);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(components);
  for (Eigen::Index t = 0; t < t_count; ++t) {
    const int c = assignment[static_cast<std::size_t>(t)];
    counts(c) += 1.0;
    const Eigen::RowVectorXd delta = frames.row(t) - centers.row(c);
    gmm.variances.row(c) += delta.array().square().matrix();
  }
  for (int c = 0; c < components; ++c) {
    if (counts(c) > 0.0) {
      gmm.weights(c) = counts(c);
      gmm.variances.row(c) =
          (gmm.variances.row(c) / counts(c)).cwiseMax(floor);
    } else {
      gmm.weights(c) = 1.0;
      gmm.variances.row(c) = global_var.cwiseMax(floor);
    }
  }
  gmm.weights /= gmm.weights.sum();

  if (trace) {
    trace->avg_log_likelihood.clear();
    trace->reinitialized_components = 0;
  }

  for (int it = 0; it < options.iterations; ++it) {
    const EmAccum acc = accumulate_em_stats(gmm, frames);
    if (trace) {
      trace->avg_log_likelihood.push_back(acc.log_likelihood /
                                          static_cast<double>(t_count));
    }

    Eigen::VectorXd raw_weights = acc.n;
    for (int c = 0; c < components; ++c) {
      if (acc.n(c) < kDegenerateMass * static_cast<double>(t_count)) {
        // Restart the component at a random frame with the global spread.
        gmm.means.row(c) = frames.row(static_cast<Eigen::Index>(
            rng.integer(static_cast<uint64_t>(t_count))));
        gmm.variances.row(c) = global_var.cwiseMax(floor);
        raw_weights(c) = 1.0;
        if (trace) ++trace->reinitialized_components;
        continue;
      }
      gmm.means.row(c) = acc.sum_x.row(c) / acc.n(c);
      gmm.variances.row(c) =
          (acc.sum_xx.row(c) / acc.n(c) -
           gmm.means.row(c).array().square().matrix())
              .cwiseMax(floor);
    }
    gmm.weights = raw_weights / raw_weights.sum();
  }
  return gmm;
}

std::pair<Gmm, Gmm> train_class_gmms(const Eigen::MatrixXd& normal_frames,
                                     const Eigen::MatrixXd& abnormal_frames,
                                     int components, const EmOptions& options,
                                     EmTrace* normal_trace,
                                     EmTrace* abnormal_trace) {
  // Both fits take the same options verbatim, so feeding the two classes
  // identical frames yields bitwise-identical models.
  Gmm normal_model = em_fit(normal_frames, components, options, normal_trace);
  Gmm abnormal_model =
      em_fit(abnormal_frames, components, options, abnormal_trace);
  return {std::move(normal_model), std::move(abnormal_model)};
}

double llr_score(const Gmm& normal_model, const Gmm& abnormal_model,
                 const Eigen::MatrixXd& frames) {
  if (normal_model.dim() != abnormal_model.dim()) {
    throw IncompatibleModelError("llr_score: class models disagree on dims");
  }
  check_frames(normal_model, frames, "llr_score");
  const double t_count = static_cast<double>(frames.rows());
  return (gmm_total_log_pdf(normal_model, frames) -
          gmm_total_log_pdf(abnormal_model, frames)) /
         t_count;
}

}  // namespace hsc
