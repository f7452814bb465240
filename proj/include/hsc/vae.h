// hsc/vae.h
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

#ifndef HSC_VAE_H_
#define HSC_VAE_H_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace hsc {

// Variational autoencoder with one tanh hidden layer on each side and a
// unit-variance Gaussian decoder.  Inputs are standardized with the stored
// per-dimension mean/std before touching the network, and reconstructions
// live in that standardized domain.
struct VaeModel {
  Eigen::MatrixXd enc_w1;        // h x p
  Eigen::VectorXd enc_b1;        // h
  Eigen::MatrixXd enc_w_mu;      // d x h
  Eigen::VectorXd enc_b_mu;      // d
  Eigen::MatrixXd enc_w_logvar;  // d x h
  Eigen::VectorXd enc_b_logvar;  // d
  Eigen::MatrixXd dec_w1;        // h x d
  Eigen::VectorXd dec_b1;        // h
  Eigen::MatrixXd dec_w2;        // p x h
  Eigen::VectorXd dec_b2;        // p
  Eigen::VectorXd input_mean;    // p
  Eigen::VectorXd input_std;     // p, strictly positive

  int input_dim() const { return static_cast<int>(enc_w1.cols()); }
  int hidden_width() const { return static_cast<int>(enc_w1.rows()); }
  int latent_dim() const { return static_cast<int>(enc_w_mu.rows()); }
};

// Exact gradients of the sampled lower bound, one tensor per parameter.
struct VaeGradients {
  Eigen::MatrixXd enc_w1;
  Eigen::VectorXd enc_b1;
  Eigen::MatrixXd enc_w_mu;
  Eigen::VectorXd enc_b_mu;
  Eigen::MatrixXd enc_w_logvar;
  Eigen::VectorXd enc_b_logvar;
  Eigen::MatrixXd dec_w1;
  Eigen::VectorXd dec_b1;
  Eigen::MatrixXd dec_w2;
  Eigen::VectorXd dec_b2;
};

struct VaeOptions {
  int latent_dim = 2;
  int hidden_width = 32;
  int epochs = 200;
  double learning_rate = 0.01;
  uint64_t seed = 42;
};

// epoch_elbo[e] is the mean sampled lower bound over epoch e.
// reduction_pointless flags latent_dim >= input dimension.
struct VaeTrace {
  std::vector<double> epoch_elbo;
  bool reduction_pointless = false;
};

// Lower bound of one sample under the reparameterization z = mu + sigma*eps
// with the given standard-normal draws, and its exact parameter gradients.
// The bound is -0.5|x~ - x'|^2 - KL(q(z|x) || N(0,I)) with constants
// dropped, so a perfect reconstruction scores exactly -KL.
double vae_elbo_and_grads(const VaeModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& noise, VaeGradients* grads);

// Plain stochastic gradient ascent on the sampled bound: seeded init,
// seeded per-epoch shuffling, seeded noise, fixed learning rate.  Runs
// single threaded so fixed seeds reproduce parameters exactly.
VaeModel vae_fit(const Eigen::MatrixXd& data, const VaeOptions& options,
                 VaeTrace* trace = nullptr);

// Posterior mean of z; no sampling, so encoding is deterministic.
Eigen::VectorXd vae_encode(const VaeModel& model, const Eigen::VectorXd& x);

// Encodes every row in parallel; returns n x d.
Eigen::MatrixXd vae_encode_rows(const VaeModel& model,
                                const Eigen::MatrixXd& data);

}  // namespace hsc

#endif  // HSC_VAE_H_
