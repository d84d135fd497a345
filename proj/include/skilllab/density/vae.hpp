#pragma once

// Gaussian VAE used as the SMM density model q(s).

#include <nlohmann/json.hpp>

#include "skilllab/distributions.hpp"
#include "skilllab/numeric/mlp.hpp"
#include "skilllab/numeric/optim.hpp"

namespace skilllab::density {

using nn::Index;
using nn::Matrix;
using nn::Rng;
using nn::Var;

struct VaeConfig {
  int state_dim = 2;
  int latent_dim = 16;
  int hidden_units = 128;
  int hidden_layers = 2;
  double beta = 0.01;
  double lr = 0.01;
  int batch_size = 128;
  int importance_samples = 10;
  double min_log_std = -5.0;
  double max_log_std = 2.0;

  static const std::vector<double>& beta_grid();
  nlohmann::json to_json() const;
  static VaeConfig from_json(const nlohmann::json& j);
};

// KL(N(mu, diag(exp(log_std))^2) || N(0, I)) per row.
Var gaussian_kl_standard(const Var& mean, const Var& log_std);
Eigen::VectorXd gaussian_kl_standard(const Matrix& mean, const Matrix& log_std);

struct ElboParts {
  double reconstruction = 0;  // E_q[log p(s|z)], batch mean
  double kl = 0;              // batch mean
  double loss = 0;            // -(reconstruction - beta * kl)
};

class GaussianVAE {
 public:
  GaussianVAE(const VaeConfig& config, Rng& rng);

  const VaeConfig& config() const { return config_; }
  // One Adam step on the negative beta-ELBO of `batch`.
  ElboParts train_step(const Matrix& batch, Rng& rng);
  ElboParts evaluate(const Matrix& batch, Rng& rng) const;
  // Importance-weighted estimate of log q(s) per row.
  Eigen::VectorXd log_density(const Matrix& states, Rng& rng) const;
  // Decoder samples s ~ p(s|z), z ~ N(0, I).
  Matrix sample(Index n, Rng& rng) const;

  void encode(const Matrix& states, Matrix& mean, Matrix& log_std) const;
  void decode(const Matrix& z, Matrix& mean, Matrix& log_std) const;

  std::vector<Var> parameters() const;
  nn::NamedParams named_parameters() const;

 private:
  ElboParts build(const Matrix& batch, Rng& rng, Var* loss) const;

  VaeConfig config_;
  nn::Mlp encoder_;
  nn::Mlp decoder_;
  nn::Adam opt_;
};

}  // namespace skilllab::density
