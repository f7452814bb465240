// src/vae.cc
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

#include "hsc/vae.h"

#include <cmath>
#include <numeric>
#include <string>

#include "hsc/error.h"
#include "hsc/parallel.h"
#include "hsc/rng.h"

namespace hsc {

namespace {

void check_input(const VaeModel& model, const Eigen::VectorXd& x,
                 const char* who) {
  if (x.size() != model.input_dim()) {
    throw DimensionError(std::string(who) + ": input has " +
                         std::to_string(x.size()) + " dims, model expects " +
                         std::to_string(model.input_dim()));
  }
}

Eigen::VectorXd standardize(const VaeModel& model, const Eigen::VectorXd& x) {
  return (x - model.input_mean).cwiseQuotient(model.input_std);
}

void fill_normal(Eigen::MatrixXd& m, double scale, Rng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = scale * rng.normal();
    }
  }
}

}  // namespace

double vae_elbo_and_grads(const VaeModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& noise, VaeGradients* grads) {
  check_input(model, x, "vae_elbo_and_grads");
  if (noise.size() != model.latent_dim()) {
    throw DimensionError("vae_elbo_and_grads: noise has " +
                         std::to_string(noise.size()) + " draws, need " +
                         std::to_string(model.latent_dim()));
  }

  const Eigen::VectorXd xs = standardize(model, x);
  const Eigen::VectorXd h1 =
      (model.enc_w1 * xs + model.enc_b1).array().tanh();
  const Eigen::VectorXd mu = model.enc_w_mu * h1 + model.enc_b_mu;
  const Eigen::VectorXd logvar = model.enc_w_logvar * h1 + model.enc_b_logvar;
  const Eigen::VectorXd sigma = (0.5 * logvar).array().exp();
  const Eigen::VectorXd z = mu + sigma.cwiseProduct(noise);
  const Eigen::VectorXd h2 =
      (model.dec_w1 * z + model.dec_b1).array().tanh();
  const Eigen::VectorXd xr = model.dec_w2 * h2 + model.dec_b2;

  if (!xr.allFinite() || !sigma.allFinite()) {
    throw NumericError("vae_elbo_and_grads: non-finite activation");
  }

  const double recon = -0.5 * (xs - xr).squaredNorm();
  const double kl =
      -0.5 *
      (1.0 + logvar.array() - mu.array().square() - logvar.array().exp())
          .sum();
  const double elbo = recon - kl;

  if (grads) {
    const Eigen::VectorXd d_xr = xs - xr;
    grads->dec_w2 = d_xr * h2.transpose();
    grads->dec_b2 = d_xr;
    const Eigen::VectorXd d_a2 =
        (model.dec_w2.transpose() * d_xr).array() *
        (1.0 - h2.array().square());
    grads->dec_w1 = d_a2 * z.transpose();
    grads->dec_b1 = d_a2;
    const Eigen::VectorXd d_z = model.dec_w1.transpose() * d_a2;

    const Eigen::VectorXd d_mu = d_z - mu;
    const Eigen::VectorXd d_logvar =
        0.5 * d_z.cwiseProduct(sigma).cwiseProduct(noise) +
        0.5 * (1.0 - logvar.array().exp()).matrix();
    grads->enc_w_mu = d_mu * h1.transpose();
    grads->enc_b_mu = d_mu;
    grads->enc_w_logvar = d_logvar * h1.transpose();
    grads->enc_b_logvar = d_logvar;

    const Eigen::VectorXd d_a1 =
        (model.enc_w_mu.transpose() * d_mu +
         model.enc_w_logvar.transpose() * d_logvar)
            .array() *
        (1.0 - h1.array().square());
    grads->enc_w1 = d_a1 * xs.transpose();
    grads->enc_b1 = d_a1;
  }
  return elbo;
}

VaeModel vae_fit(const Eigen::MatrixXd& data, const VaeOptions& options,
                 VaeTrace* trace) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (n < 1 || p < 1) {
    throw InvalidInputError("vae_fit: empty training set");
  }
  if (options.latent_dim < 1 || options.hidden_width < 1) {
    throw ConfigError("vae_fit: latent and hidden sizes must be positive");
  }
  if (options.epochs < 0 || !(options.learning_rate > 0.0)) {
    throw ConfigError("vae_fit: bad epoch count or learning rate");
  }

  const int d = options.latent_dim;
  const int h = options.hidden_width;
  Rng rng(options.seed);

  VaeModel model;
  model.input_mean = data.colwise().mean().transpose();
  const Eigen::VectorXd var = (data.rowwise() - model.input_mean.transpose())
                                  .array()
                                  .square()
                                  .colwise()
                                  .mean()
                                  .transpose();
  // Constant input dimensions standardize to zero instead of dividing by 0.
  model.input_std = var.array().sqrt().max(1e-12).matrix();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (var(j) <= 1e-24) model.input_std(j) = 1.0;
  }

  model.enc_w1.resize(h, p);
  model.enc_w_mu.resize(d, h);
  model.enc_w_logvar.resize(d, h);
  model.dec_w1.resize(h, d);
  model.dec_w2.resize(p, h);
  fill_normal(model.enc_w1, 1.0 / std::sqrt(static_cast<double>(p)), rng);
  fill_normal(model.enc_w_mu, 1.0 / std::sqrt(static_cast<double>(h)), rng);
  fill_normal(model.enc_w_logvar, 1.0 / std::sqrt(static_cast<double>(h)),
              rng);
  fill_normal(model.dec_w1, 1.0 / std::sqrt(static_cast<double>(d)), rng);
  fill_normal(model.dec_w2, 1.0 / std::sqrt(static_cast<double>(h)), rng);
  model.enc_b1 = Eigen::VectorXd::Zero(h);
  model.enc_b_mu = Eigen::VectorXd::Zero(d);
  model.enc_b_logvar = Eigen::VectorXd::Zero(d);
  model.dec_b1 = Eigen::VectorXd::Zero(h);
  model.dec_b2 = Eigen::VectorXd::Zero(p);

  if (trace) {
    trace->epoch_elbo.clear();
    trace->reduction_pointless = d >= static_cast<int>(p);
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd noise(d);
  VaeGradients grads;
  const double lr = options.learning_rate;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    double elbo_sum = 0.0;
    for (int idx : order) {
      for (int j = 0; j < d; ++j) noise(j) = rng.normal();
      double elbo;
      try {
        elbo = vae_elbo_and_grads(model, data.row(idx).transpose(), noise,
                                  &grads);
      } catch (const NumericError&) {
        throw NumericError("vae_fit: training diverged at epoch " +
                           std::to_string(epoch));
      }
      if (!std::isfinite(elbo)) {
        throw NumericError("vae_fit: training diverged at epoch " +
                           std::to_string(epoch));
      }
      elbo_sum += elbo;

      model.enc_w1 += lr * grads.enc_w1;
      model.enc_b1 += lr * grads.enc_b1;
      model.enc_w_mu += lr * grads.enc_w_mu;
      model.enc_b_mu += lr * grads.enc_b_mu;
      model.enc_w_logvar += lr * grads.enc_w_logvar;
      model.enc_b_logvar += lr * grads.enc_b_logvar;
      model.dec_w1 += lr * grads.dec_w1;
      model.dec_b1 += lr * grads.dec_b1;
      model.dec_w2 += lr * grads.dec_w2;
      model.dec_b2 += lr * grads.dec_b2;
    }
    if (trace) {
      trace->epoch_elbo.push_back(elbo_sum / static_cast<double>(n));
    }
  }
  return model;
}

Eigen::VectorXd vae_encode(const VaeModel& model, const Eigen::VectorXd& x) {
  check_input(model, x, "vae_encode");
  const Eigen::VectorXd h1 =
      (model.enc_w1 * standardize(model, x) + model.enc_b1).array().tanh();
  return model.enc_w_mu * h1 + model.enc_b_mu;
}

Eigen::MatrixXd vae_encode_rows(const VaeModel& model,
                                const Eigen::MatrixXd& data) {
  if (data.cols() != model.input_dim()) {
    throw DimensionError("vae_encode_rows: input has " +
                         std::to_string(data.cols()) +
                         " dims, model expects " +
                         std::to_string(model.input_dim()));
  }
  Eigen::MatrixXd out(data.rows(), model.latent_dim());
  parallel_for(static_cast<int>(data.rows()), [&](int i) {
    out.row(i) = vae_encode(model, data.row(i).transpose()).transpose();
  });
  return out;
}

}  // namespace hsc
