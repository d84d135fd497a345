#pragma once

// VQ-VAE over states: encoder z_e(s), a K x D codebook, and a Gaussian
// decoder q(s|e_k). Inputs are standardized with statistics fixed at fit time.

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "skilllab/distributions.hpp"
#include "skilllab/numeric/mlp.hpp"
#include "skilllab/numeric/optim.hpp"

namespace skilllab::density {

using nn::Index;
using nn::Matrix;
using nn::Rng;
using nn::Var;

struct VqVaeConfig {
  int state_dim = 2;
  int codes = 10;
  int code_dim = 16;
  int hidden_units = 128;
  int hidden_layers = 2;
  double commitment = 0.25;
  double lr = 2e-4;
  // The codebook gets its own optimizer at lr * codebook_lr_scale so codes
  // keep up with the encoder.
  double codebook_lr_scale = 50.0;
  int batch_size = 256;
  int samples = 4096;
  int train_steps = 4000;
  bool learn_sigma = false;
  bool normalize_input = true;

  static const std::vector<double>& commitment_grid();
  void validate() const;
  nlohmann::json to_json() const;
  static VqVaeConfig from_json(const nlohmann::json& j);
};

// argmin_k ||z_e - e_k||, lowest index on ties. One entry per row of z_e.
std::vector<int> nearest_code(const Matrix& codebook, const Matrix& z_e);
// One-hot rows from nearest_code.
Matrix one_hot_posterior(const Matrix& codebook, const Matrix& z_e);

struct VqLosses {
  double reconstruction = 0;  // -E[log q(s|e_k)] in normalized coordinates
  double codebook = 0;        // ||sg(z_e) - e_k||^2
  double commitment = 0;      // ||z_e - sg(e_k)||^2 (unweighted)
  double total = 0;
};

struct VqGraph {
  Var z_e;
  Var z_q;  // straight-through decoder input
  Var total;
  VqLosses losses;
};

class VqVae {
 public:
  VqVae() = default;
  VqVae(const VqVaeConfig& config, Rng& rng);

  const VqVaeConfig& config() const { return config_; }

  // Fixes the input standardization from the training sample.
  void fit_normalizer(const Matrix& states);
  // Codebook initialized by k-means++ seeding on encoder outputs.
  void init_codebook(const Matrix& states, Rng& rng);
  VqGraph build_loss(const Matrix& states, double commitment) const;
  VqLosses train_step(const Matrix& states);
  VqLosses evaluate(const Matrix& states) const;

  Matrix encode(const Matrix& states) const;
  std::vector<int> assign(const Matrix& states) const;
  Matrix posterior(const Matrix& states) const;
  // Decoder Gaussian for code k, in raw state coordinates.
  dist::DiagGaussian decoder_head(int k) const;
  // Decoder means for every code, raw coordinates, K x state_dim.
  Matrix decoder_means() const;
  // Decoder mean for an arbitrary latent row, raw coordinates.
  Eigen::VectorXd decode_latent(const Eigen::VectorXd& latent) const;
  Matrix codebook() const { return codebook_.value(); }

  // Codes with no assigned rows in `states`.
  std::vector<int> dead_codes(const Matrix& states) const;

  std::vector<Var> parameters() const;
  nn::NamedParams named_parameters() const;
  std::uint64_t checksum() const;
  const nn::RunningNormalizer& normalizer() const { return norm_; }

  // {K, D, rows, model}
  nlohmann::json to_json() const;
  static VqVae from_json(const nlohmann::json& j);

 private:
  Matrix normalized(const Matrix& states) const;
  Matrix decoder_out(const Matrix& latents) const;

  VqVaeConfig config_;
  nn::Mlp encoder_;
  nn::Mlp decoder_;
  Var codebook_;
  nn::RunningNormalizer norm_{2};
  nn::Adam opt_;
  nn::Adam code_opt_;
  void reset_optimizers();
};

// Trains on `samples` rows drawn uniformly from `states` for
// config.train_steps minibatch steps. Returns the final full-sample losses.
VqLosses train_vqvae(VqVae& model, const Matrix& states, Rng& rng);

}  // namespace skilllab::density
