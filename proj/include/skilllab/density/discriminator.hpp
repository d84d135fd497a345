#pragma once

// q(z|s): a state classifier over N skills, fitted by maximum likelihood.

#include <span>

#include <nlohmann/json.hpp>

#include "skilllab/numeric/mlp.hpp"
#include "skilllab/numeric/optim.hpp"

namespace skilllab::density {

using nn::Index;
using nn::Matrix;
using nn::Rng;
using nn::Var;

struct DiscriminatorConfig {
  int state_dim = 2;
  int skills = 10;
  int hidden_units = 128;
  int hidden_layers = 2;
  double lr = 1e-3;
  int batch_size = 250;
  bool normalize_input = true;

  nlohmann::json to_json() const;
  static DiscriminatorConfig from_json(const nlohmann::json& j);
};

class SkillDiscriminator {
 public:
  SkillDiscriminator(const DiscriminatorConfig& config, Rng& rng);

  const DiscriminatorConfig& config() const { return config_; }
  // log q(z|s) for every skill, rows x N. Graph-free.
  Matrix log_probs(const Matrix& states) const;
  // Mean cross-entropy on (states, labels).
  double loss(const Matrix& states, std::span<const int> labels) const;
  double accuracy(const Matrix& states, std::span<const int> labels) const;
  // One shuffled pass of minibatch cross-entropy steps. Updates the input
  // normalizer with `states` first. Returns the mean minibatch loss.
  double train_epoch(const Matrix& states, std::span<const int> labels, Rng& rng);

  std::vector<Var> parameters() const { return net_.parameters(); }
  nn::NamedParams named_parameters() const;
  nn::RunningNormalizer& normalizer() { return norm_; }
  const nn::RunningNormalizer& normalizer() const { return norm_; }

 private:
  Matrix input(const Matrix& states) const;
  Var logits(const Matrix& states) const;

  DiscriminatorConfig config_;
  nn::Mlp net_;
  nn::RunningNormalizer norm_;
  nn::Adam opt_;
};

}  // namespace skilllab::density
