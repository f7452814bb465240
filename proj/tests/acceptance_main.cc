// tests/acceptance_main.cc
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

// Release gate: every bar the pipeline has to clear, one line per check.
// Each check prints PASS or FAIL with the measured numbers; the binary
// exits nonzero when anything fails.  The last check needs a real dataset
// and is skipped unless HSC_PHYSIONET_DIR points at one.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hsc/config.h"
#include "hsc/error.h"
#include "hsc/eval.h"
#include "hsc/gmm.h"
#include "hsc/ivector.h"
#include "hsc/labels.h"
#include "hsc/mfcc.h"
#include "hsc/parallel.h"
#include "hsc/pca.h"
#include "hsc/pipeline.h"
#include "hsc/split.h"
#include "hsc/svm.h"
#include "hsc/vae.h"
#include "oracles.h"

using namespace hsc;
using namespace hsc::testing;
namespace fs = std::filesystem;

namespace {

std::string fail(const char* fmt, ...) {
  char buffer[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buffer, sizeof(buffer), fmt, args);
  va_end(args);
  return std::string(buffer);
}

struct Stopwatch {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

// ---------------------------------------------------------------------------
// 01  spectrum and cepstrum against direct-form transforms

std::string check_spectral_transforms(std::string* note) {
  constexpr double kTol = 1e-9;
  constexpr double kBudgetSeconds = 1.0;
  MfccConfig config;
  const int frame_length = config.frame_length();
  const int hop = config.hop_length();

  Rng rng(11);
  Stopwatch watch;
  double worst_spectrum = 0.0;
  double worst_cepstrum = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd frame(frame_length);
    for (int i = 0; i < frame_length; ++i) frame[i] = rng.normal();
    Eigen::VectorXd fast = power_spectrum(frame, config.fft_size);
    Eigen::VectorXd slow = naive_power_spectrum(frame, config.fft_size);
    worst_spectrum =
        std::max(worst_spectrum, (fast - slow).cwiseAbs().maxCoeff());

    Eigen::VectorXd energies(config.n_filters);
    for (int i = 0; i < config.n_filters; ++i) energies[i] = rng.normal();
    Eigen::VectorXd ceps = dct_cepstra(energies, config.n_ceps);
    Eigen::VectorXd ref = naive_dct(energies, config.n_ceps);
    worst_cepstrum =
        std::max(worst_cepstrum, (ceps - ref).cwiseAbs().maxCoeff());
  }
  const double elapsed = watch.seconds();
  if (worst_spectrum > kTol)
    return fail("spectrum error %.3g exceeds %.0e", worst_spectrum, kTol);
  if (worst_cepstrum > kTol)
    return fail("cepstrum error %.3g exceeds %.0e", worst_cepstrum, kTol);

  for (int n = frame_length; n < frame_length + 400; n += 13) {
    std::vector<double> signal(static_cast<size_t>(n), 0.25);
    const Eigen::Index expected = 1 + (n - frame_length) / hop;
    const Eigen::Index got = frame_and_window(signal, config).rows();
    if (got != expected)
      return fail("frame count for n=%d: got %ld, expected %ld", n,
                  static_cast<long>(got), static_cast<long>(expected));
  }
  if (elapsed >= kBudgetSeconds)
    return fail("oracle comparison took %.2f s, budget %.0f s", elapsed,
                kBudgetSeconds);
  *note = fail("max err %.2g spectrum, %.2g cepstrum, %.2f s", worst_spectrum,
               worst_cepstrum, elapsed);
  return "";
}

// ---------------------------------------------------------------------------
// 02  mel scale anchor points

std::string check_mel_anchors(std::string* note) {
  constexpr double kTol = 1e-6;
  if (hz_to_mel(0.0) != 0.0)
    return fail("hz_to_mel(0) = %.17g, expected exactly 0", hz_to_mel(0.0));
  const double expected = 2595.0 * std::log10(2.0);
  const double got = hz_to_mel(700.0);
  if (std::abs(got - expected) > kTol)
    return fail("hz_to_mel(700) = %.12f, expected %.12f", got, expected);
  *note = fail("hz_to_mel(700) off by %.2g", std::abs(got - expected));
  return "";
}

// ---------------------------------------------------------------------------
// 03  mixture EM likelihood climbs; one component has a closed form

std::string check_em_monotonic(std::string* note) {
  constexpr double kRelTol = 1e-8;
  constexpr double kClosedFormTol = 1e-12;
  double worst_drop = 0.0;
  for (uint64_t seed : {21u, 22u, 23u}) {
    Rng rng(seed);
    Gmm source = random_gmm(3, 2, rng);
    Eigen::MatrixXd frames = sample_gmm(source, 400, rng);
    EmOptions options;
    options.iterations = 20;
    options.seed = seed;
    EmTrace trace;
    em_fit(frames, 3, options, &trace);
    if (trace.reinitialized_components != 0)
      return fail("seed %llu reinitialized %d components",
                  static_cast<unsigned long long>(seed),
                  trace.reinitialized_components);
    for (size_t i = 1; i < trace.avg_log_likelihood.size(); ++i) {
      const double prev = trace.avg_log_likelihood[i - 1];
      const double cur = trace.avg_log_likelihood[i];
      const double slack = kRelTol * std::max(1.0, std::abs(prev));
      worst_drop = std::max(worst_drop, prev - cur);
      if (cur + slack < prev)
        return fail("seed %llu iteration %zu: %.12f fell to %.12f",
                    static_cast<unsigned long long>(seed), i, prev, cur);
    }
  }

  Rng rng(24);
  Eigen::MatrixXd frames(200, 3);
  for (int i = 0; i < frames.rows(); ++i)
    for (int j = 0; j < frames.cols(); ++j) frames(i, j) = rng.normal() + j;
  Gmm single = em_fit(frames, 1, EmOptions{});
  Eigen::RowVectorXd mean = frames.colwise().mean();
  Eigen::RowVectorXd var =
      (frames.rowwise() - mean).array().square().colwise().mean();
  if (std::abs(single.weights[0] - 1.0) > kClosedFormTol)
    return fail("single-component weight %.17g", single.weights[0]);
  const double mean_err = (single.means.row(0) - mean).cwiseAbs().maxCoeff();
  const double var_err =
      (single.variances.row(0) - var).cwiseAbs().maxCoeff();
  if (mean_err > kClosedFormTol)
    return fail("single-component mean off by %.3g", mean_err);
  if (var_err > kClosedFormTol)
    return fail("single-component variance off by %.3g", var_err);
  *note = fail("worst likelihood drop %.2g, closed form off by %.2g",
               worst_drop, std::max(mean_err, var_err));
  return "";
}

// ---------------------------------------------------------------------------
// 04  occupancy and shift statistics against a per-frame reference

std::string check_alignment_stats(std::string* note) {
  constexpr double kMassTol = 1e-8;
  constexpr double kStatTol = 1e-10;
  double worst = 0.0;
  for (uint64_t seed : {31u, 32u, 33u}) {
    Rng rng(seed);
    Gmm ubm = random_gmm(5, 3, rng);
    Eigen::MatrixXd frames = sample_gmm(ubm, 300, rng);
    BaumWelchStats stats = accumulate_stats(ubm, frames);
    if (std::abs(stats.n.sum() - frames.rows()) > kMassTol)
      return fail("occupancy total %.12f for %ld frames", stats.n.sum(),
                  static_cast<long>(frames.rows()));
    Eigen::VectorXd n_ref;
    Eigen::MatrixXd f_ref;
    naive_baum_welch(ubm, frames, &n_ref, &f_ref);
    const double n_err = (stats.n - n_ref).cwiseAbs().maxCoeff();
    const double f_err = (stats.f - f_ref).cwiseAbs().maxCoeff();
    worst = std::max({worst, n_err, f_err});
    if (n_err > kStatTol || f_err > kStatTol)
      return fail("seed %llu stats off by %.3g (n) / %.3g (f)",
                  static_cast<unsigned long long>(seed), n_err, f_err);
  }
  *note = fail("max deviation %.2g over 3 random models", worst);
  return "";
}

// ---------------------------------------------------------------------------
// 05  factor posterior closed forms and the precision identity

TotalVariabilityModel scalar_model(double t, double variance) {
  TotalVariabilityModel model;
  model.t = Eigen::MatrixXd::Constant(1, 1, t);
  model.ubm_means = Eigen::VectorXd::Zero(1);
  model.ubm_variances = Eigen::VectorXd::Constant(1, variance);
  model.components = 1;
  model.feat_dim = 1;
  return model;
}

BaumWelchStats scalar_stats(double n, double f) {
  BaumWelchStats stats;
  stats.n = Eigen::VectorXd::Constant(1, n);
  stats.f = Eigen::MatrixXd::Constant(1, 1, f);
  return stats;
}

std::string check_posterior_closed_form(std::string* note) {
  constexpr double kTol = 1e-10;
  IVectorPosterior pinned =
      posterior_wi(scalar_model(2.0, 1.0), scalar_stats(3.0, 6.0));
  if (std::abs(pinned.covariance(0, 0) - 1.0 / 13.0) > kTol)
    return fail("pinned covariance %.12f, expected 1/13",
                pinned.covariance(0, 0));
  if (std::abs(pinned.mean[0] - 12.0 / 13.0) > kTol)
    return fail("pinned mean %.12f, expected 12/13", pinned.mean[0]);

  Rng rng(41);
  double worst_scalar = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double t = rng.normal();
    const double variance = 0.5 + 1.5 * rng.uniform();
    const double n = 0.5 + 19.5 * rng.uniform();
    const double f = 3.0 * rng.normal();
    IVectorPosterior post =
        posterior_wi(scalar_model(t, variance), scalar_stats(n, f));
    const double cov = 1.0 / (1.0 + n * t * t / variance);
    const double mean = cov * t * f / variance;
    worst_scalar = std::max({worst_scalar,
                             std::abs(post.covariance(0, 0) - cov),
                             std::abs(post.mean[0] - mean)});
  }
  if (worst_scalar > kTol)
    return fail("scalar posterior off by %.3g", worst_scalar);

  double worst_identity = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int c = 2 + static_cast<int>(2.0 * rng.uniform());
    const int d = 2 + static_cast<int>(2.0 * rng.uniform());
    const int rank = 2 + static_cast<int>(3.0 * rng.uniform());
    Gmm ubm = random_gmm(c, d, rng);
    TotalVariabilityModel model;
    model.t = Eigen::MatrixXd(c * d, rank);
    for (int i = 0; i < model.t.rows(); ++i)
      for (int j = 0; j < rank; ++j) model.t(i, j) = 0.5 * rng.normal();
    // Supervectors stack the per-component rows.
    model.ubm_means = Eigen::VectorXd(c * d);
    model.ubm_variances = Eigen::VectorXd(c * d);
    for (int k = 0; k < c; ++k) {
      model.ubm_means.segment(k * d, d) = ubm.means.row(k).transpose();
      model.ubm_variances.segment(k * d, d) = ubm.variances.row(k).transpose();
    }
    model.components = c;
    model.feat_dim = d;
    BaumWelchStats stats;
    stats.n = Eigen::VectorXd(c);
    stats.f = Eigen::MatrixXd(c, d);
    for (int k = 0; k < c; ++k) {
      stats.n[k] = 1.0 + 29.0 * rng.uniform();
      for (int j = 0; j < d; ++j) stats.f(k, j) = rng.normal();
    }
    IVectorPosterior post = posterior_wi(model, stats);
    Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(rank, rank);
    for (int k = 0; k < c; ++k) {
      Eigen::MatrixXd block = model.t.block(k * d, 0, d, rank);
      Eigen::VectorXd inv_var = ubm.variances.row(k).cwiseInverse();
      precision += stats.n[k] * block.transpose() *
                   inv_var.asDiagonal() * block;
    }
    const double err = (precision * post.covariance -
                        Eigen::MatrixXd::Identity(rank, rank))
                           .cwiseAbs()
                           .maxCoeff();
    worst_identity = std::max(worst_identity, err);
  }
  if (worst_identity > kTol)
    return fail("precision times covariance off identity by %.3g",
                worst_identity);
  *note = fail("scalar off by %.2g, identity off by %.2g", worst_scalar,
               worst_identity);
  return "";
}

// ---------------------------------------------------------------------------
// 06  factor subspace recovered from synthetic statistics

std::string check_subspace_recovery(std::string* note) {
  constexpr double kMinCosine = 0.9;
  constexpr double kBudgetSeconds = 30.0;
  const int c = 4;
  const int d = 2;
  const int rank = 2;
  const int records = 200;

  Rng rng(51);
  Gmm ubm = random_gmm(c, d, rng);
  Eigen::MatrixXd t_star(c * d, rank);
  for (int i = 0; i < t_star.rows(); ++i)
    for (int j = 0; j < rank; ++j) t_star(i, j) = 0.5 * rng.normal();

  // Statistics drawn from the generative story itself: each record owns a
  // latent w, every component sees a mean shifted by its block of T*.
  std::vector<BaumWelchStats> stat_list;
  stat_list.reserve(records);
  for (int r = 0; r < records; ++r) {
    Eigen::VectorXd w(rank);
    for (int j = 0; j < rank; ++j) w[j] = rng.normal();
    BaumWelchStats stats;
    stats.n = Eigen::VectorXd(c);
    stats.f = Eigen::MatrixXd(c, d);
    for (int k = 0; k < c; ++k) {
      const double occupancy = 100.0 + 100.0 * rng.uniform();
      stats.n[k] = occupancy;
      Eigen::VectorXd shift = t_star.block(k * d, 0, d, rank) * w;
      for (int j = 0; j < d; ++j) {
        const double sd = std::sqrt(ubm.variances(k, j));
        stats.f(k, j) = occupancy * shift[j] +
                        std::sqrt(occupancy) * sd * rng.normal();
      }
    }
    stat_list.push_back(std::move(stats));
  }

  TvOptions options;
  options.rank = rank;
  options.iterations = 10;
  options.seed = 7;
  TvTrace trace;
  Stopwatch watch;
  TotalVariabilityModel model = train_tv(ubm, stat_list, options, &trace);
  const double elapsed = watch.seconds();

  if (!trace.residual_monotonic) return fail("residual increased during EM");
  Eigen::VectorXd cosines = principal_angle_cosines(model.t, t_star);
  if (cosines.minCoeff() < kMinCosine)
    return fail("aligned cosine %.4f below %.2f", cosines.minCoeff(),
                kMinCosine);
  if (elapsed >= kBudgetSeconds)
    return fail("training took %.1f s, budget %.0f s", elapsed,
                kBudgetSeconds);
  *note = fail("aligned cosine %.4f, %.2f s", cosines.minCoeff(), elapsed);
  return "";
}

// ---------------------------------------------------------------------------
// 07  principal axes against a dense eigensolver

std::string check_principal_axes(std::string* note) {
  constexpr double kTol = 1e-8;
  Rng rng(61);
  const int n = 60;
  const int p = 8;
  Eigen::MatrixXd data(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) data(i, j) = (1.0 + 0.5 * j) * rng.normal();

  PcaModel model = pca_fit(data, p);
  Eigen::RowVectorXd mean = data.colwise().mean();
  Eigen::MatrixXd centered = data.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / double(n - 1);
  Eigen::VectorXd ref_vals;
  Eigen::MatrixXd ref_vecs;
  jacobi_eigen(cov, &ref_vals, &ref_vecs);

  double worst = 0.0;
  for (int j = 0; j < p; ++j) {
    worst = std::max(worst, std::abs(model.eigenvalues[j] - ref_vals[j]));
    const double cosine = std::abs(model.components.col(j).dot(ref_vecs.col(j)));
    worst = std::max(worst, std::abs(cosine - 1.0));
  }
  if (worst > kTol) return fail("axes off the dense solver by %.3g", worst);

  const double ortho = (model.components.transpose() * model.components -
                        Eigen::MatrixXd::Identity(p, p))
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > kTol) return fail("axes not orthonormal, off by %.3g", ortho);
  *note = fail("axes off by %.2g, orthonormal to %.2g", worst, ortho);
  return "";
}

// ---------------------------------------------------------------------------
// 08  encoder gradients, a rising bound, and the zero-divergence point

VaeModel zero_vae(int p, int h, int d) {
  VaeModel model;
  model.enc_w1 = Eigen::MatrixXd::Zero(h, p);
  model.enc_b1 = Eigen::VectorXd::Zero(h);
  model.enc_w_mu = Eigen::MatrixXd::Zero(d, h);
  model.enc_b_mu = Eigen::VectorXd::Zero(d);
  model.enc_w_logvar = Eigen::MatrixXd::Zero(d, h);
  model.enc_b_logvar = Eigen::VectorXd::Zero(d);
  model.dec_w1 = Eigen::MatrixXd::Zero(h, d);
  model.dec_b1 = Eigen::VectorXd::Zero(h);
  model.dec_w2 = Eigen::MatrixXd::Zero(p, h);
  model.dec_b2 = Eigen::VectorXd::Zero(p);
  model.input_mean = Eigen::VectorXd::Zero(p);
  model.input_std = Eigen::VectorXd::Ones(p);
  return model;
}

std::string check_encoder_bound(std::string* note) {
  constexpr double kGradTol = 1e-4;
  Rng rng(71);
  double worst_grad = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 2 + static_cast<int>(4.0 * rng.uniform());
    const int h = 2 + static_cast<int>(3.0 * rng.uniform());
    const int d = 1 + static_cast<int>(2.99 * rng.uniform());
    VaeModel model = zero_vae(p, h, d);
    auto views = vae_param_views(model);
    for (auto& view : views)
      for (Eigen::Index i = 0; i < view.size; ++i)
        view.data[i] = 0.3 * rng.normal();
    Eigen::VectorXd x(p), noise(d);
    for (int i = 0; i < p; ++i) x[i] = rng.normal();
    for (int i = 0; i < d; ++i) noise[i] = rng.normal();
    worst_grad = std::max(worst_grad, vae_max_grad_error(model, x, noise));
  }
  if (worst_grad > kGradTol)
    return fail("gradient error %.3g exceeds %.0e", worst_grad, kGradTol);

  Eigen::MatrixXd data(60, 3);
  for (int i = 0; i < data.rows(); ++i) {
    const double a = rng.normal();
    data(i, 0) = a;
    data(i, 1) = 2.0 * a + 0.05 * rng.normal();
    data(i, 2) = -a + 0.05 * rng.normal();
  }
  VaeOptions options;
  options.latent_dim = 1;
  options.hidden_width = 6;
  options.epochs = 60;
  options.seed = 5;
  VaeTrace trace;
  vae_fit(data, options, &trace);
  if (trace.epoch_elbo.back() <= trace.epoch_elbo.front())
    return fail("bound fell from %.6f to %.6f", trace.epoch_elbo.front(),
                trace.epoch_elbo.back());

  // Zero heads encode exactly the standard normal and the zero decoder
  // reproduces the centered input, so the whole bound collapses to -KL = 0.
  VaeModel standard = zero_vae(3, 4, 2);
  const double elbo = vae_elbo_and_grads(standard, Eigen::VectorXd::Zero(3),
                                         Eigen::VectorXd::Zero(2), nullptr);
  if (elbo != 0.0) return fail("divergence at the prior point: %.17g", -elbo);
  *note = fail("gradients off by %.2g, bound rose %.3f", worst_grad,
               trace.epoch_elbo.back() - trace.epoch_elbo.front());
  return "";
}

// ---------------------------------------------------------------------------
// 09  dual optimality conditions and a grid-search bound

// Best dual objective with the first two multipliers on a grid and the
// third solved exactly: on the feasible segment the restricted objective
// is a one-variable quadratic, so its maximum is an endpoint or the vertex.
double profiled_best_dual(const Eigen::MatrixXd& kernel,
                          const std::vector<int>& labels, double c,
                          int steps) {
  const double t3 = labels[2];
  const double t4 = labels[3];
  auto objective = [&](double a1, double a2, double a3, double a4) {
    return svm_dual_objective(kernel, labels, {a1, a2, a3, a4});
  };
  double best = -std::numeric_limits<double>::infinity();
  for (int i1 = 0; i1 <= steps; ++i1) {
    const double a1 = c * i1 / steps;
    for (int i2 = 0; i2 <= steps; ++i2) {
      const double a2 = c * i2 / steps;
      const double s = -(labels[0] * a1 + labels[1] * a2);
      // a4 = t4*(s - t3*a3) stays in [0, c] on a segment of a3.
      const double q = t4 * t3;
      double lo = 0.0, hi = c;
      if (q > 0.0) {
        lo = std::max(lo, t4 * s - c);
        hi = std::min(hi, t4 * s);
      } else {
        lo = std::max(lo, -t4 * s);
        hi = std::min(hi, c - t4 * s);
      }
      if (lo > hi) continue;
      auto at = [&](double a3) {
        return objective(a1, a2, a3, t4 * (s - t3 * a3));
      };
      double candidate = std::max(at(lo), at(hi));
      const double h = 0.5 * (hi - lo);
      if (h > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double f_lo = at(lo), f_mid = at(mid), f_hi = at(hi);
        const double denom = f_lo - 2.0 * f_mid + f_hi;
        if (std::abs(denom) > 1e-15) {
          double vertex = mid + 0.5 * h * (f_lo - f_hi) / denom;
          vertex = std::min(hi, std::max(lo, vertex));
          candidate = std::max(candidate, at(vertex));
        }
      }
      best = std::max(best, candidate);
    }
  }
  return best;
}

std::string check_dual_optimality(std::string* note) {
  constexpr double kFeasibilityTol = 1e-12;
  constexpr double kGridTol = 1e-4;
  constexpr double kOriginTol = 1e-6;

  // Two separable clouds; every training point must satisfy the
  // first-order conditions at its own multiplier.
  Rng rng(81);
  const int per_class = 15;
  Eigen::MatrixXd data(2 * per_class, 2);
  std::vector<int> labels(2 * per_class);
  for (int i = 0; i < per_class; ++i) {
    data(i, 0) = 2.0 + 0.6 * rng.normal();
    data(i, 1) = 2.0 + 0.6 * rng.normal();
    labels[static_cast<size_t>(i)] = 1;
    data(per_class + i, 0) = -2.0 + 0.6 * rng.normal();
    data(per_class + i, 1) = -2.0 + 0.6 * rng.normal();
    labels[static_cast<size_t>(per_class + i)] = -1;
  }
  SvmOptions options;
  options.c = 5.0;
  options.sigma = 1.0;
  options.tolerance = 1e-4;
  options.max_passes = 2000;
  SvmModel model = svm_train(data, labels, options);
  if (!model.converged) return fail("separable fixture did not converge");
  if (std::abs(model.dual_coeffs.sum()) > kFeasibilityTol)
    return fail("equality constraint off by %.3g",
                std::abs(model.dual_coeffs.sum()));
  const double slack = 10.0 * options.tolerance;
  // A multiplier within rounding of the box edges is classified as sitting
  // on the edge; steps that return a point to a bound leave residue there.
  const double edge = 1e-9 * options.c;
  for (int i = 0; i < data.rows(); ++i) {
    double alpha = 0.0;
    for (int m = 0; m < model.count(); ++m) {
      if (model.support_vectors.row(m) == data.row(i)) {
        alpha = std::abs(model.dual_coeffs[m]);
        break;
      }
    }
    if (alpha < -kFeasibilityTol || alpha > options.c + kFeasibilityTol)
      return fail("multiplier %d out of box: %.6f", i, alpha);
    const double margin =
        labels[static_cast<size_t>(i)] *
        svm_decision(model, data.row(i).transpose());
    if (alpha <= edge && margin < 1.0 - slack)
      return fail("zero-multiplier point %d has margin %.4f", i, margin);
    if (alpha > edge && alpha < options.c - edge &&
        std::abs(margin - 1.0) > slack)
      return fail("free point %d has margin %.6f", i, margin);
    if (alpha >= options.c - edge && margin > 1.0 + slack)
      return fail("bound point %d has margin %.4f", i, margin);
  }

  // Four points, small enough that a grid plus exact line search bounds
  // the true optimum tightly.
  Eigen::MatrixXd tiny(4, 1);
  tiny << 0.0, 0.8, 1.6, 2.9;
  std::vector<int> tiny_labels{-1, -1, 1, 1};
  SvmOptions tiny_options;
  tiny_options.c = 1.0;
  tiny_options.sigma = 1.0;
  tiny_options.tolerance = 1e-6;
  tiny_options.max_passes = 5000;
  SvmModel tiny_model = svm_train(tiny, tiny_labels, tiny_options);
  if (!tiny_model.converged) return fail("tiny fixture did not converge");
  Eigen::MatrixXd kernel(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      kernel(i, j) = rbf_kernel(tiny.row(i).transpose(),
                                tiny.row(j).transpose(), tiny_options.sigma);
  std::vector<double> alpha(4, 0.0);
  for (int m = 0; m < tiny_model.count(); ++m)
    for (int i = 0; i < 4; ++i)
      if (tiny_model.support_vectors(m, 0) == tiny(i, 0))
        alpha[static_cast<size_t>(i)] = std::abs(tiny_model.dual_coeffs[m]);
  const double reached = svm_dual_objective(kernel, tiny_labels, alpha);
  const double oracle =
      profiled_best_dual(kernel, tiny_labels, tiny_options.c, 400);
  if (std::abs(reached - oracle) > kGridTol)
    return fail("dual %.8f vs grid %.8f", reached, oracle);

  // Mirror-symmetric points force the boundary through the origin.
  Eigen::MatrixXd symmetric(4, 1);
  symmetric << -2.0, -1.0, 1.0, 2.0;
  std::vector<int> symmetric_labels{-1, -1, 1, 1};
  SvmOptions symmetric_options;
  symmetric_options.c = 10.0;
  symmetric_options.sigma = 1.5;
  symmetric_options.tolerance = 1e-5;
  symmetric_options.max_passes = 1000;
  SvmModel symmetric_model =
      svm_train(symmetric, symmetric_labels, symmetric_options);
  const double at_origin =
      svm_decision(symmetric_model, Eigen::VectorXd::Zero(1));
  if (std::abs(at_origin) > kOriginTol)
    return fail("decision at the origin %.3g", at_origin);
  *note = fail("dual gap %.2g, origin %.2g", std::abs(reached - oracle),
               std::abs(at_origin));
  return "";
}

// ---------------------------------------------------------------------------
// 10  weighted screening metrics and sweep shape

std::string check_metrics(std::string* note) {
  constexpr double kHandTol = 1e-10;
  if (compute_macc(0.845, 0.785) != 0.815)
    return fail("compute_macc(0.845, 0.785) = %.17g",
                compute_macc(0.845, 0.785));

  ConfusionCounts counts;
  counts.aa1 = 8;
  counts.an1 = 2;
  counts.aa2 = 1;
  counts.an2 = 1;
  counts.nn1 = 1;
  auto [se, sp] = compute_se_sp(counts, EvalWeights{});
  if (std::abs(se - 0.75806) > kHandTol)
    return fail("hand-tallied sensitivity %.12f, expected 0.75806", se);

  Rng rng(91);
  std::map<std::string, double> scores;
  LabelTable truth;
  for (int i = 0; i < 40; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "r%04d", i);
    scores[id] = rng.normal();
    LabelEntry entry;
    entry.label = rng.uniform() < 0.5 ? Label::kNormal : Label::kAbnormal;
    entry.quality = rng.uniform() < 0.3 ? Quality::kPoor : Quality::kGood;
    truth.entries[id] = entry;
  }
  SweepResult sweep = sweep_curve(scores, truth, EvalWeights{});
  if (sweep.curve.front().se != 0.0 || sweep.curve.front().sp != 1.0)
    return fail("sweep does not start at (se 0, sp 1)");
  if (sweep.curve.back().se != 1.0 || sweep.curve.back().sp != 0.0)
    return fail("sweep does not end at (se 1, sp 0)");
  for (size_t i = 1; i < sweep.curve.size(); ++i) {
    if (sweep.curve[i].se < sweep.curve[i - 1].se)
      return fail("sensitivity fell at sweep point %zu", i);
    if (sweep.curve[i].sp > sweep.curve[i - 1].sp)
      return fail("specificity rose at sweep point %zu", i);
  }
  *note = fail("hand case off by %.2g, %zu sweep points monotone",
               std::abs(se - 0.75806), sweep.curve.size());
  return "";
}

// ---------------------------------------------------------------------------
// 11  held-out accuracy on a separable toy corpus

struct HeldOutSplit {
  std::string train_dir;
  std::string train_labels;
  std::string eval_dir;
  LabelTable eval_truth;
};

HeldOutSplit materialize_split(const TempDir& dir, const ToyCorpus& corpus,
                               double train_fraction, uint64_t seed) {
  LabelTable truth = load_reference(corpus.labels_file);
  SplitSpec spec;
  spec.train_fraction = train_fraction;
  spec.seed = seed;
  auto [train_table, eval_table] = split_train_eval(truth, spec);

  HeldOutSplit split;
  split.train_dir = dir.file("train");
  split.eval_dir = dir.file("eval");
  split.train_labels = dir.file("train.csv");
  fs::create_directories(split.train_dir);
  fs::create_directories(split.eval_dir);
  std::ofstream labels(split.train_labels);
  for (const auto& [id, entry] : train_table.entries) {
    fs::copy_file(corpus.data_dir + "/" + id + ".wav",
                  split.train_dir + "/" + id + ".wav");
    labels << id << ',' << (entry.label == Label::kNormal ? -1 : 1) << '\n';
  }
  for (const auto& [id, entry] : eval_table.entries) {
    fs::copy_file(corpus.data_dir + "/" + id + ".wav",
                  split.eval_dir + "/" + id + ".wav");
  }
  split.eval_truth = eval_table;
  return split;
}

std::string check_toy_corpus_bar(std::string* note) {
  constexpr double kMinMacc = 0.95;
  constexpr double kBudgetSeconds = 120.0;
  TempDir dir("accept-toy");
  ToyCorpus corpus = write_toy_corpus(dir, 40, 12.0, 123);
  HeldOutSplit split = materialize_split(dir, corpus, 0.8, 42);

  PipelineConfig config;
  config.ubm_components = 16;
  config.ubm_iterations = 10;
  config.ivector_rank = 8;
  config.tv_iterations = 15;
  config.reduction = Reduction::kPca;
  config.reduced_dim = 4;
  config.classifier = Classifier::kGmm;
  config.class_gmm_components = 4;
  config.class_gmm_iterations = 10;
  config.seed = 42;

  const int saved_threads = max_threads();
  set_threads(1);
  Stopwatch watch;
  cmd_train(split.train_dir, split.train_labels, config, dir.file("bundle"));
  std::map<std::string, double> scores =
      cmd_score(split.eval_dir, dir.file("bundle"), "");
  const double elapsed = watch.seconds();
  set_threads(saved_threads);

  SweepResult sweep = sweep_curve(scores, split.eval_truth, EvalWeights{});
  if (sweep.best_macc < kMinMacc)
    return fail("held-out MAcc %.4f below %.2f", sweep.best_macc, kMinMacc);
  if (elapsed >= kBudgetSeconds)
    return fail("single-threaded run took %.1f s, budget %.0f s", elapsed,
                kBudgetSeconds);
  *note = fail("held-out MAcc %.3f (Se %.3f, Sp %.3f) in %.1f s",
               sweep.best_macc, sweep.best_se, sweep.best_sp, elapsed);
  return "";
}

// ---------------------------------------------------------------------------
// 12  byte-identical retraining and rescoring

std::string check_reproducibility(std::string* note) {
  TempDir dir("accept-repro");
  ToyCorpus corpus = write_toy_corpus(dir, 12, 5.0, 123);

  PipelineConfig config;
  config.ubm_components = 4;
  config.ubm_iterations = 3;
  config.ivector_rank = 2;
  config.tv_iterations = 3;
  config.reduction = Reduction::kPca;
  config.reduced_dim = 2;
  config.classifier = Classifier::kGmm;
  config.class_gmm_components = 2;
  config.class_gmm_iterations = 3;
  config.seed = 42;

  std::string csv[2];
  for (int run = 0; run < 2; ++run) {
    const std::string bundle = dir.file("bundle" + std::to_string(run));
    csv[run] = dir.file("scores" + std::to_string(run) + ".csv");
    cmd_train(corpus.data_dir, corpus.labels_file, config, bundle);
    cmd_score(corpus.data_dir, bundle, csv[run]);
  }
  const std::string first = slurp(csv[0]);
  const std::string second = slurp(csv[1]);
  if (first.empty()) return fail("first run wrote an empty scores file");
  if (first != second) return fail("score files differ between runs");
  *note = fail("%zu byte score files identical", first.size());
  return "";
}

// ---------------------------------------------------------------------------
// 13  smoke run against a real dataset, opt-in via HSC_PHYSIONET_DIR

std::string check_real_dataset(const std::string& data_root,
                               std::string* note) {
  constexpr double kLow = 0.85;
  constexpr double kHigh = 1.00;
  const std::string labels_file = data_root + "/reference.csv";
  if (!fs::exists(labels_file))
    return fail("%s not found", labels_file.c_str());

  TempDir dir("accept-real");
  ToyCorpus corpus;
  corpus.data_dir = data_root;
  corpus.labels_file = labels_file;
  HeldOutSplit split = materialize_split(dir, corpus, 0.8, 42);

  PipelineConfig config;
  config.ubm_components = 2048;
  config.ivector_rank = 100;
  config.classifier = Classifier::kGmm;
  config.class_gmm_components = 128;
  config.seed = 42;

  config.reduction = Reduction::kNone;
  cmd_train(split.train_dir, split.train_labels, config, dir.file("raw"));
  SweepResult raw = sweep_curve(cmd_score(split.eval_dir, dir.file("raw"), ""),
                                split.eval_truth, EvalWeights{});

  config.reduction = Reduction::kPca;
  config.reduced_dim = 16;
  cmd_train(split.train_dir, split.train_labels, config, dir.file("pca"));
  SweepResult pca = sweep_curve(cmd_score(split.eval_dir, dir.file("pca"), ""),
                                split.eval_truth, EvalWeights{});

  if (pca.best_macc < kLow || pca.best_macc > kHigh)
    return fail("MAcc %.4f outside [%.2f, %.2f]", pca.best_macc, kLow, kHigh);
  if (pca.best_macc + 1e-12 < raw.best_macc)
    return fail("reduced MAcc %.4f fell below raw %.4f", pca.best_macc,
                raw.best_macc);
  *note = fail("MAcc %.4f reduced vs %.4f raw", pca.best_macc, raw.best_macc);
  return "";
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    std::function<std::string(std::string*)> body;
  };
  const std::vector<Criterion> criteria = {
      {"01 spectrum and cepstrum match direct-form transforms",
       check_spectral_transforms},
      {"02 mel scale anchor points", check_mel_anchors},
      {"03 mixture EM climbs; one component solves in closed form",
       check_em_monotonic},
      {"04 alignment statistics match a per-frame reference",
       check_alignment_stats},
      {"05 factor posterior closed forms and precision identity",
       check_posterior_closed_form},
      {"06 factor subspace recovered from synthetic statistics",
       check_subspace_recovery},
      {"07 principal axes match a dense eigensolver", check_principal_axes},
      {"08 encoder gradients, rising bound, zero divergence at the prior",
       check_encoder_bound},
      {"09 dual optimality conditions and a grid-search bound",
       check_dual_optimality},
      {"10 weighted screening metrics and sweep shape", check_metrics},
      {"11 held-out accuracy on a separable toy corpus", check_toy_corpus_bar},
      {"12 byte-identical retraining and rescoring", check_reproducibility},
  };

  int failures = 0;
  int passed = 0;
  for (const auto& criterion : criteria) {
    std::string detail;
    std::string error;
    try {
      error = criterion.body(&detail);
    } catch (const std::exception& e) {
      error = fail("threw: %s", e.what());
    }
    if (error.empty()) {
      ++passed;
      std::printf("[PASS] %s (%s)\n", criterion.label, detail.c_str());
    } else {
      ++failures;
      std::printf("[FAIL] %s: %s\n", criterion.label, error.c_str());
    }
    std::fflush(stdout);
  }

  const char* real_root = std::getenv("HSC_PHYSIONET_DIR");
  const char* real_label = "13 smoke run against a user-supplied dataset";
  if (real_root == nullptr || real_root[0] == '\0') {
    std::printf("[SKIP] %s (HSC_PHYSIONET_DIR not set)\n", real_label);
  } else {
    std::string detail;
    std::string error;
    try {
      error = check_real_dataset(real_root, &detail);
    } catch (const std::exception& e) {
      error = fail("threw: %s", e.what());
    }
    if (error.empty()) {
      ++passed;
      std::printf("[PASS] %s (%s)\n", real_label, detail.c_str());
    } else {
      ++failures;
      std::printf("[FAIL] %s: %s\n", real_label, error.c_str());
    }
  }

  std::printf("acceptance: %d passed, %d failed\n", passed, failures);
  return failures == 0 ? 0 : 1;
}
