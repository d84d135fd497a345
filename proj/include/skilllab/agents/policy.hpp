#pragma once

#include <nlohmann/json.hpp>

#include "skilllab/distributions.hpp"
#include "skilllab/numeric/mlp.hpp"
#include "skilllab/numeric/normalizer.hpp"

namespace skilllab::agents {

using nn::Index;
using nn::Matrix;
using nn::Rng;
using nn::Var;

struct NetworkConfig {
  int state_dim = 2;
  // 0 for unconditioned policies, N for one-hot skills, D for codebook codes.
  int latent_dim = 0;
  int action_dim = 2;
  int hidden_units = 128;
  int hidden_layers = 2;
  double action_bound = 0.95;
  bool normalize_input = true;

  nlohmann::json to_json() const;
  static NetworkConfig from_json(const nlohmann::json& j);
};

// pi(a | s, z): normalized state concatenated with the latent, two ReLU
// layers, and a head emitting Beta shape parameters softplus(x) + 1 per
// action dimension, rescaled to [-action_bound, action_bound].
class SkillConditionedPolicy {
 public:
  struct Head {
    Var alpha;
    Var beta;
  };

  SkillConditionedPolicy() = default;
  SkillConditionedPolicy(const NetworkConfig& config, Rng& rng);

  const NetworkConfig& config() const { return config_; }
  Index input_dim() const { return config_.state_dim + config_.latent_dim; }
  double low() const { return -config_.action_bound; }
  double high() const { return config_.action_bound; }

  // Network input rows from raw states and latents (latents may have zero
  // columns). Uses the current normalizer statistics.
  Matrix make_input(const Matrix& states, const Matrix& latents) const;

  Head forward(const Var& input) const;
  // Graph-free alpha/beta for a batch of inputs.
  void infer(const Matrix& input, Matrix& alpha, Matrix& beta) const;
  dist::ScaledBeta distribution(const Eigen::VectorXd& input_row) const;

  nn::RunningNormalizer& normalizer() { return normalizer_; }
  const nn::RunningNormalizer& normalizer() const { return normalizer_; }
  std::vector<Var> parameters() const { return net_.parameters(); }
  nn::NamedParams named_parameters() const;

 private:
  NetworkConfig config_;
  nn::Mlp net_;
  nn::RunningNormalizer normalizer_;
};

// V(s, z) over the same input rows as the policy. The network regresses
// returns standardized by a running normalizer; infer() undoes it.
class ValueNet {
 public:
  ValueNet() = default;
  ValueNet(const NetworkConfig& config, Rng& rng);

  // Standardized prediction, rows x 1.
  Var forward(const Var& input) const { return net_.forward(input); }
  // Prediction in return units.
  Eigen::VectorXd infer(const Matrix& input) const;
  nn::RunningNormalizer& target_normalizer() { return target_norm_; }
  const nn::RunningNormalizer& target_normalizer() const { return target_norm_; }
  std::vector<Var> parameters() const { return net_.parameters(); }
  nn::NamedParams named_parameters() const;

 private:
  nn::Mlp net_;
  nn::RunningNormalizer target_norm_{1};
};

// Policy, value function and input normalizer in one checkpoint document.
nlohmann::json save_agent(const SkillConditionedPolicy& policy, const ValueNet& value);
void load_agent(const nlohmann::json& j, SkillConditionedPolicy& policy,
                ValueNet& value);

}  // namespace skilllab::agents
