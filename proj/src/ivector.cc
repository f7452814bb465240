// src/ivector.cc
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

#include "hsc/ivector.h"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Cholesky>

#include "hsc/error.h"
#include "hsc/parallel.h"
#include "hsc/rng.h"

namespace hsc {

namespace {

void check_model(const TotalVariabilityModel& model, const char* who) {
  const int c = model.components;
  const int d = model.feat_dim;
  if (c < 1 || d < 1 || model.rank() < 1) {
    throw DimensionError(std::string(who) + ": empty factor model");
  }
  if (model.t.rows() != c * d || model.ubm_means.size() != c * d ||
      model.ubm_variances.size() != c * d) {
    throw DimensionError(std::string(who) +
                         ": supervector sizes disagree with C*D");
  }
}

void check_stats(const TotalVariabilityModel& model,
                 const BaumWelchStats& stats, const char* who) {
  if (stats.n.size() != model.components ||
      stats.f.rows() != model.components ||
      stats.f.cols() != model.feat_dim) {
    throw DimensionError(std::string(who) +
                         ": statistics shaped " + std::to_string(stats.n.size()) +
                         "/" + std::to_string(stats.f.rows()) + "x" +
                         std::to_string(stats.f.cols()) +
                         " do not fit a model with C=" +
                         std::to_string(model.components) +
                         " D=" + std::to_string(model.feat_dim));
  }
}

// Per-component pieces reused across every record under a fixed T:
// sigma_inv_t holds S_c^-1 T_c, gram holds T_c^t S_c^-1 T_c.
struct TvCache {
  std::vector<Eigen::MatrixXd> sigma_inv_t;  // C of D x R
  std::vector<Eigen::MatrixXd> gram;         // C of R x R
};

TvCache build_cache(const TotalVariabilityModel& model) {
  TvCache cache;
  cache.sigma_inv_t.reserve(static_cast<std::size_t>(model.components));
  cache.gram.reserve(static_cast<std::size_t>(model.components));
  for (int c = 0; c < model.components; ++c) {
    Eigen::MatrixXd sit =
        model.variance_block(c).cwiseInverse().asDiagonal() * model.t_block(c);
    cache.gram.push_back(model.t_block(c).transpose() * sit);
    cache.sigma_inv_t.push_back(std::move(sit));
  }
  return cache;
}

IVectorPosterior posterior_with_cache(const TotalVariabilityModel& model,
                                      const TvCache& cache,
                                      const BaumWelchStats& stats) {
  const int r = model.rank();
  Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(r, r);
  Eigen::VectorXd linear = Eigen::VectorXd::Zero(r);
  for (int c = 0; c < model.components; ++c) {
    precision.noalias() +=
        stats.n(c) * cache.gram[static_cast<std::size_t>(c)];
    linear.noalias() +=
        cache.sigma_inv_t[static_cast<std::size_t>(c)].transpose() *
        stats.f.row(c).transpose();
  }

  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw NumericError(
        "posterior_wi: latent precision is not positive definite (rank " +
        std::to_string(r) + ", " + std::to_string(model.components) +
        " components)");
  }
  IVectorPosterior post;
  post.mean = llt.solve(linear);
  post.covariance = llt.solve(Eigen::MatrixXd::Identity(r, r));
  post.covariance = 0.5 * (post.covariance + post.covariance.transpose());
  post.second_moment = post.covariance + post.mean * post.mean.transpose();
  if (!post.mean.allFinite() || !post.covariance.allFinite()) {
    throw NumericError(
        "posterior_wi: non-finite posterior; statistics carry total mass " +
        std::to_string(stats.n.sum()));
  }
  return post;
}

}  // namespace

BaumWelchStats accumulate_stats(const Gmm& ubm,
                                const Eigen::MatrixXd& frames) {
  const EmAccum acc = accumulate_em_stats(ubm, frames);
  BaumWelchStats stats;
  stats.n = acc.n;
  // Center the first-order sums once at the end: F_c = sum_x_c - N_c m_c.
  stats.f = acc.sum_x - acc.n.asDiagonal() * ubm.means;
  return stats;
}

BaumWelchStats accumulate_stats_serial(const Gmm& ubm,
                                       const Eigen::MatrixXd& frames) {
  const EmAccum acc = accumulate_em_stats_serial(ubm, frames);
  BaumWelchStats stats;
  stats.n = acc.n;
  stats.f = acc.sum_x - acc.n.asDiagonal() * ubm.means;
  return stats;
}

std::vector<BaumWelchStats> accumulate_stats_batch(
    const Gmm& ubm, const std::vector<Eigen::MatrixXd>& features) {
  std::vector<BaumWelchStats> out(features.size());
  parallel_for(static_cast<int>(features.size()), [&](int i) {
    out[static_cast<std::size_t>(i)] =
        accumulate_stats(ubm, features[static_cast<std::size_t>(i)]);
  });
  return out;
}

IVectorPosterior posterior_wi(const TotalVariabilityModel& model,
                              const BaumWelchStats& stats) {
  check_model(model, "posterior_wi");
  check_stats(model, stats, "posterior_wi");
  return posterior_with_cache(model, build_cache(model), stats);
}

Eigen::MatrixXd update_t(const TotalVariabilityModel& model,
                         const std::vector<BaumWelchStats>& stat_list,
                         const std::vector<IVectorPosterior>& posterior_list,
                         int* skipped_components) {
  check_model(model, "update_t");
  if (stat_list.empty() || stat_list.size() != posterior_list.size()) {
    throw InvalidInputError(
        "update_t: statistics and posteriors must align and be non-empty");
  }
  const int c_count = model.components;
  const int d = model.feat_dim;
  const int r = model.rank();

  Eigen::MatrixXd numer = Eigen::MatrixXd::Zero(c_count * d, r);
  std::vector<Eigen::MatrixXd> denom(
      static_cast<std::size_t>(c_count), Eigen::MatrixXd::Zero(r, r));
  Eigen::VectorXd total_n = Eigen::VectorXd::Zero(c_count);
  for (std::size_t i = 0; i < stat_list.size(); ++i) {
    check_stats(model, stat_list[i], "update_t");
    const auto& post = posterior_list[i];
    if (post.mean.size() != r) {
      throw DimensionError("update_t: posterior rank mismatch");
    }
    total_n += stat_list[i].n;
    for (int c = 0; c < c_count; ++c) {
      numer.middleRows(c * d, d).noalias() +=
          stat_list[i].f.row(c).transpose() * post.mean.transpose();
      denom[static_cast<std::size_t>(c)].noalias() +=
          stat_list[i].n(c) * post.second_moment;
    }
  }

  Eigen::MatrixXd t_new = model.t;
  int skipped = 0;
  for (int c = 0; c < c_count; ++c) {
    if (total_n(c) <= 0.0) {
      ++skipped;
      continue;
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(
        denom[static_cast<std::size_t>(c)]);
    const Eigen::MatrixXd rows =
        ldlt.solve(numer.middleRows(c * d, d).transpose()).transpose();
    if (ldlt.info() != Eigen::Success || !rows.allFinite()) {
      throw NumericError("update_t: singular accumulator for component " +
                         std::to_string(c));
    }
    t_new.middleRows(c * d, d) = rows;
  }
  if (skipped_components) *skipped_components = skipped;
  return t_new;
}

TotalVariabilityModel train_tv(const Gmm& ubm,
                               const std::vector<BaumWelchStats>& stat_list,
                               const TvOptions& options, TvTrace* trace) {
  const int c_count = ubm.components();
  const int d = ubm.dim();
  if (stat_list.empty()) {
    throw InvalidInputError("train_tv: no statistics to train on");
  }
  if (options.rank < 1) {
    throw ConfigError("train_tv: rank must be positive");
  }
  if (options.rank > c_count * d) {
    throw ConfigError("train_tv: rank " + std::to_string(options.rank) +
                      " exceeds the supervector dimension " +
                      std::to_string(c_count * d));
  }
  if (options.iterations < 0) {
    throw ConfigError("train_tv: negative iteration count");
  }

  TotalVariabilityModel model;
  model.components = c_count;
  model.feat_dim = d;
  model.ubm_means.resize(c_count * d);
  model.ubm_variances.resize(c_count * d);
  for (int c = 0; c < c_count; ++c) {
    model.ubm_means.segment(c * d, d) = ubm.means.row(c).transpose();
    model.ubm_variances.segment(c * d, d) = ubm.variances.row(c).transpose();
  }
  for (const auto& stats : stat_list) check_stats(model, stats, "train_tv");

  const int r = options.rank;
  const int n_records = static_cast<int>(stat_list.size());
  Rng rng(options.seed);
  const double scale = 0.1 * ubm.variances.array().sqrt().mean();
  model.t.resize(c_count * d, r);
  for (Eigen::Index i = 0; i < model.t.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.t.cols(); ++j) {
      model.t(i, j) = scale * rng.normal();
    }
  }

  Eigen::VectorXd total_n = Eigen::VectorXd::Zero(c_count);
  for (const auto& stats : stat_list) total_n += stats.n;

  if (trace) {
    trace->residual.clear();
    trace->residual_monotonic = true;
    trace->skipped_components = 0;
  }

  struct TvAccum {
    Eigen::MatrixXd numer;                // (C*D) x R
    std::vector<Eigen::MatrixXd> denom;   // C of R x R
  };

  Eigen::MatrixXd w_means(n_records, r);
  for (int it = 0; it < options.iterations; ++it) {
    const TvCache cache = build_cache(model);

    const int blocks = block_count(n_records, kAccumBlock);
    std::vector<TvAccum> parts(static_cast<std::size_t>(blocks));
    parallel_blocks(n_records, [&](int block, int begin, int end) {
      TvAccum acc;
      acc.numer = Eigen::MatrixXd::Zero(c_count * d, r);
      acc.denom.assign(static_cast<std::size_t>(c_count),
                       Eigen::MatrixXd::Zero(r, r));
      for (int i = begin; i < end; ++i) {
        const auto& stats = stat_list[static_cast<std::size_t>(i)];
        const IVectorPosterior post =
            posterior_with_cache(model, cache, stats);
        w_means.row(i) = post.mean.transpose();
        for (int c = 0; c < c_count; ++c) {
          acc.numer.middleRows(c * d, d).noalias() +=
              stats.f.row(c).transpose() * post.mean.transpose();
          acc.denom[static_cast<std::size_t>(c)].noalias() +=
              stats.n(c) * post.second_moment;
        }
      }
      parts[static_cast<std::size_t>(block)] = std::move(acc);
    });

    Eigen::MatrixXd numer = Eigen::MatrixXd::Zero(c_count * d, r);
    std::vector<Eigen::MatrixXd> denom(
        static_cast<std::size_t>(c_count), Eigen::MatrixXd::Zero(r, r));
    for (const auto& part : parts) {
      numer += part.numer;
      for (int c = 0; c < c_count; ++c) {
        denom[static_cast<std::size_t>(c)] +=
            part.denom[static_cast<std::size_t>(c)];
      }
    }

    for (int c = 0; c < c_count; ++c) {
      if (total_n(c) <= 0.0) {
        if (trace) ++trace->skipped_components;
        continue;
      }
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(
          denom[static_cast<std::size_t>(c)]);
      const Eigen::MatrixXd rows =
          ldlt.solve(numer.middleRows(c * d, d).transpose()).transpose();
      if (ldlt.info() != Eigen::Success || !rows.allFinite()) {
        throw NumericError("train_tv: singular accumulator for component " +
                           std::to_string(c) + " at iteration " +
                           std::to_string(it));
      }
      model.t.middleRows(c * d, d) = rows;
    }

    // Residual of the updated factors against this iteration's posteriors.
    std::vector<double> res_parts(static_cast<std::size_t>(blocks), 0.0);
    parallel_blocks(n_records, [&](int block, int begin, int end) {
      double sum = 0.0;
      for (int i = begin; i < end; ++i) {
        const auto& stats = stat_list[static_cast<std::size_t>(i)];
        for (int c = 0; c < c_count; ++c) {
          const Eigen::VectorXd predicted =
              stats.n(c) * (model.t_block(c) * w_means.row(i).transpose());
          sum += (stats.f.row(c).transpose() - predicted).squaredNorm();
        }
      }
      res_parts[static_cast<std::size_t>(block)] = sum;
    });
    double residual = 0.0;
    for (double part : res_parts) residual += part;

    if (trace) {
      if (!trace->residual.empty()) {
        const double prev = trace->residual.back();
        if (residual > prev + 1e-6 * std::abs(prev)) {
          trace->residual_monotonic = false;
        }
      }
      trace->residual.push_back(residual);
    }
  }
  return model;
}

Eigen::VectorXd extract_ivector(const TotalVariabilityModel& model,
                                const BaumWelchStats& stats) {
  return posterior_wi(model, stats).mean;
}

Eigen::MatrixXd extract_ivectors(const TotalVariabilityModel& model,
                                 const std::vector<BaumWelchStats>& stat_list) {
  check_model(model, "extract_ivectors");
  const TvCache cache = build_cache(model);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(stat_list.size()),
                      model.rank());
  parallel_for(static_cast<int>(stat_list.size()), [&](int i) {
    const auto& stats = stat_list[static_cast<std::size_t>(i)];
    check_stats(model, stats, "extract_ivectors");
    out.row(i) =
        posterior_with_cache(model, cache, stats).mean.transpose();
  });
  return out;
}

}  // namespace hsc
