#pragma once

// Sources of p(s) for skill discovery: an oracle over free space, a
// State Marginal Matching mixture, and the replay buffer holding the result.

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "skilllab/agents/ppo.hpp"
#include "skilllab/density/discriminator.hpp"
#include "skilllab/density/vae.hpp"
#include "skilllab/env/maze.hpp"

namespace skilllab::explore {

using nn::Index;
using nn::Matrix;
using nn::Rng;

// FIFO ring of states with per-state provenance tags.
class StateBuffer {
 public:
  explicit StateBuffer(Index capacity = 50000, Index dim = 2);

  Index capacity() const { return capacity_; }
  Index size() const { return size_; }
  Index dim() const { return data_.cols(); }
  bool full() const { return size_ == capacity_; }

  void push(const Eigen::VectorXd& state, int source = -1);
  void push_rows(const Matrix& states, int source = -1);
  // Uniform with replacement. Throws std::logic_error when empty.
  Matrix sample(Index n, Rng& rng) const;
  // Oldest first.
  Matrix contents() const;
  std::vector<int> sources() const;

  // JSON array of state rows.
  nlohmann::json to_json() const;
  static StateBuffer from_json(const nlohmann::json& j, Index capacity = 50000);

 private:
  Index capacity_;
  Index size_ = 0;
  Index head_ = 0;  // next write position
  Matrix data_;
  std::vector<int> source_;
};

// Uniform samples over free space (optionally intersected with `region`)
// by rejection. Throws std::runtime_error if more than 99.9% of proposals
// are rejected.
Matrix oracle_sample(const env::MazeSpec& spec, Index n, Rng& rng,
                     const std::optional<env::Box>& region = {});

struct SmmConfig {
  int members = 4;
  // Both picked from their tuning sets. With beta 0.01 the importance
  // weighted estimate of q(s) is dominated by prior mismatch and the reward
  // stops tracking visitation.
  double alpha = 1.0;  // weight of the -log pi(a|s) reward term
  double vae_beta = 1.0;
  double vae_lr = 0.01;
  double discriminator_lr = 1e-3;
  double policy_lr = 1e-3;
  int batch_size = 128;
  Index buffer_capacity = 50000;
  int round_steps = 1000;          // environment steps per collection round
  int policy_epochs = 4;           // PPO passes over each round's batch
  int vae_steps_per_round = 300;
  int discriminator_steps_per_round = 20;
  int hidden_units = 128;
  int hidden_layers = 2;

  static const std::vector<double>& alpha_grid();
  static const std::vector<double>& vae_beta_grid();
  void validate() const;
  nlohmann::json to_json() const;
  static SmmConfig from_json(const nlohmann::json& j);
};

struct SmmRound {
  int round = 0;
  int member = 0;
  double reward_mean = 0;
  double density_reward_mean = 0;
  double vae_loss = 0;
  double discriminator_loss = 0;
  nlohmann::json to_json() const;
};

struct SmmResult {
  StateBuffer buffer;
  std::vector<SmmRound> history;
  std::vector<agents::SkillConditionedPolicy> policies;
  int steps = 0;
};

// Rotates mixture members each round: collect with the active member, push
// visited states, fit q(s) and the member discriminator on the buffer, then
// one PPO update of the active member on
//   log p*(s) - log q(s) + log d(k|s) - log(1/M) + alpha * (-log pi(a|s)).
// Stops once the buffer is full.
SmmResult smm_train(const env::MazeSpec& spec, const SmmConfig& config, Rng& rng);

// Buffer of states visited by a randomly initialized policy.
StateBuffer random_policy_buffer(const env::MazeSpec& spec, Index n, Rng& rng);

// Shannon entropy (nats) of the histogram of `states` over a grid of
// `cells` x `cells` bins spanning the maze.
double discretized_entropy(const Matrix& states, const env::MazeSpec& spec, int cells = 10);

}  // namespace skilllab::explore
