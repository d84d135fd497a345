#pragma once

// q(s|z) for the forward-MI baseline: one network maps the one-hot skill to
// a diagonal Gaussian over (normalized) states.

#include <span>

#include <nlohmann/json.hpp>

#include "skilllab/distributions.hpp"
#include "skilllab/numeric/mlp.hpp"
#include "skilllab/numeric/optim.hpp"

namespace skilllab::density {

using nn::Index;
using nn::Matrix;
using nn::Rng;
using nn::Var;

struct SkillDensityConfig {
  int state_dim = 2;
  int skills = 10;
  int hidden_units = 128;
  int hidden_layers = 2;
  double lr = 1e-3;
  int batch_size = 250;
  double min_log_std = -5.0;
  double max_log_std = 2.0;
  bool normalize_input = true;

  nlohmann::json to_json() const;
  static SkillDensityConfig from_json(const nlohmann::json& j);
};

class SkillDensityModel {
 public:
  SkillDensityModel(const SkillDensityConfig& config, Rng& rng);

  const SkillDensityConfig& config() const { return config_; }
  // Gaussian head for skill z in raw state coordinates.
  dist::DiagGaussian head(int z) const;
  // log q(s|z_i) for every skill, rows x N, in raw state coordinates.
  Matrix log_probs(const Matrix& states) const;
  // Mean negative log-likelihood of (states, labels).
  double loss(const Matrix& states, std::span<const int> labels) const;
  double train_epoch(const Matrix& states, std::span<const int> labels, Rng& rng);

  std::vector<Var> parameters() const { return net_.parameters(); }
  nn::NamedParams named_parameters() const;
  nn::RunningNormalizer& normalizer() { return norm_; }
  const nn::RunningNormalizer& normalizer() const { return norm_; }

 private:
  // Per-skill (mean, log_std) in normalized coordinates, N x 2d.
  Matrix heads() const;
  Var nll(const Matrix& states, std::span<const int> labels) const;

  SkillDensityConfig config_;
  nn::Mlp net_;
  nn::RunningNormalizer norm_;
  nn::Adam opt_;
};

}  // namespace skilllab::density
