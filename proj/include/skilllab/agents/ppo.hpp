#pragma once

// Rollout collection, generalized advantage estimation and the clipped-PPO
// trainer shared by every method in the lab.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "skilllab/agents/policy.hpp"
#include "skilllab/env/maze.hpp"
#include "skilllab/numeric/optim.hpp"

namespace skilllab::agents {

// Immutable episodic environment; the caller owns the state vector.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual double action_bound() const = 0;
  virtual int horizon() const = 0;
  virtual Eigen::VectorXd reset(Rng& rng) const = 0;
  // Returns the next state and writes the extrinsic reward.
  virtual Eigen::VectorXd step(const Eigen::VectorXd& state,
                               const Eigen::VectorXd& action,
                               double& reward) const = 0;
};

// Maze dynamics. Without a goal the extrinsic reward is zero; with one it is
// the negative Euclidean distance from the next state to the goal.
class MazeEnvironment : public Environment {
 public:
  explicit MazeEnvironment(env::MazeSpec spec, std::optional<env::Vec2> goal = {});

  const env::MazeSpec& spec() const { return spec_; }
  int state_dim() const override { return 2; }
  int action_dim() const override { return 2; }
  double action_bound() const override { return spec_.action_bound; }
  int horizon() const override { return spec_.horizon; }
  Eigen::VectorXd reset(Rng& rng) const override;
  Eigen::VectorXd step(const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                       double& reward) const override;

 private:
  env::MazeSpec spec_;
  std::optional<env::Vec2> goal_;
};

// One-step continuous bandit with reward -(a - target)^2.
class BanditEnvironment : public Environment {
 public:
  explicit BanditEnvironment(double target = 0.5, double bound = 0.95)
      : target_(target), bound_(bound) {}
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  double action_bound() const override { return bound_; }
  int horizon() const override { return 1; }
  Eigen::VectorXd reset(Rng&) const override { return Eigen::VectorXd::Zero(1); }
  Eigen::VectorXd step(const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                       double& reward) const override;

 private:
  double target_;
  double bound_;
};

// Discrete skills: latent row k conditions skill k, and skills are drawn
// from `prior` at every episode reset.
struct SkillSet {
  Matrix latents;
  dist::CategoricalDist prior;

  static SkillSet one_hot(int n);
  static SkillSet from_codes(const Matrix& codes);
  // A single empty latent for unconditioned policies.
  static SkillSet none();
  int size() const { return static_cast<int>(latents.rows()); }
};

// Flattened transitions. Episodes are stored contiguously in collection order.
struct RolloutBuffer {
  Matrix inputs;       // policy input rows used at collection time
  Matrix states;       // raw states
  Matrix next_states;  // raw next states
  Matrix actions;
  Matrix latents;      // one row per episode
  Eigen::VectorXd log_probs;
  Eigen::VectorXd values;
  Eigen::VectorXd rewards;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
  std::vector<int> skills;        // per step
  std::vector<int> episode_of;    // per step
  std::vector<int> episode_start; // offset of each episode's first step
  std::vector<int> episode_skill;

  Index size() const { return states.rows(); }
  int episodes() const { return static_cast<int>(episode_start.size()); }
  int episode_length(int e) const;
  // Maze trajectories (2-D states and actions only).
  std::vector<env::Trajectory> trajectories() const;
  // Copy containing only the listed episodes, in the given order.
  RolloutBuffer select_episodes(std::span<const int> episodes) const;
};

struct CollectOptions {
  int n_steps = 2500;
  bool update_normalizer = true;
  // Consecutive episodes (0,1), (2,3), ... share one sampled skill.
  bool paired_episodes = false;
  // Act with the Beta mean instead of sampling.
  bool deterministic = false;
  // Separate generator for episode resets; the main one when null.
  Rng* reset_rng = nullptr;
};

// Runs ceil(n_steps / horizon) episodes in lockstep, sampling one skill per
// episode (or per pair) from the prior. Rewards hold the extrinsic reward.
RolloutBuffer collect_rollouts(SkillConditionedPolicy& policy, const ValueNet* value,
                               const Environment& env, const SkillSet& skills,
                               const CollectOptions& options, Rng& rng);

// Runs one episode per latent row. `skill_ids` labels the episodes.
RolloutBuffer collect_episodes(SkillConditionedPolicy& policy, const ValueNet* value,
                               const Environment& env, const Matrix& latents,
                               std::span<const int> skill_ids,
                               const CollectOptions& options, Rng& rng);

using RewardFn =
    std::function<Eigen::VectorXd(const Matrix& next_states, std::span<const int> skills)>;
void add_intrinsic_rewards(RolloutBuffer& buffer, const RewardFn& reward);

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

// A_t = sum_k (gamma*lambda)^k delta_{t+k}, delta_t = r_t + gamma V_{t+1} - V_t,
// with V_T = bootstrap. Returns = advantages + values.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double bootstrap, double gamma, double lambda);
// Per-episode GAE over a buffer. Episodes end at the horizon and are
// treated as terminal (bootstrap 0).
void compute_buffer_advantages(RolloutBuffer& buffer, double gamma, double lambda);

enum class EntropyMode { kAnalytic, kSampled };

struct PPOConfig {
  double gamma = 0.99;
  double gae_lambda = 0.98;
  double entropy_coef = 0.001;
  double lr = 3e-4;
  int horizon = 2500;
  int batch_size = 250;
  int epochs = 4;
  double clip_ratio = 0.2;
  bool normalize_advantages = true;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  EntropyMode entropy_mode = EntropyMode::kAnalytic;

  // Grid-search sets; defaults take the first element.
  static const std::vector<double>& entropy_grid();
  static const std::vector<double>& lr_grid();

  void validate() const;
  nlohmann::json to_json() const;
  static PPOConfig from_json(const nlohmann::json& j);
};

struct PPOMetrics {
  double policy_loss = 0;
  double value_loss = 0;
  double entropy = 0;
  double clip_fraction = 0;
  int skipped_minibatches = 0;
  bool skipped = false;
};

struct LossParts {
  Var total;
  Var policy_loss;
  Var value_loss;
  Var entropy;
  double clip_fraction = 0;
};

// Clipped surrogate + entropy bonus + value regression on one minibatch.
LossParts ppo_loss(const SkillConditionedPolicy& policy, const ValueNet& value,
                   const Matrix& inputs, const Matrix& actions,
                   const Eigen::VectorXd& old_log_probs,
                   const Eigen::VectorXd& advantages, const Eigen::VectorXd& returns,
                   const PPOConfig& config);

class PPOTrainer {
 public:
  PPOTrainer(SkillConditionedPolicy& policy, ValueNet& value, PPOConfig config);

  // Normalizes advantages, then runs `epochs` passes of shuffled
  // minibatches. Minibatches with a non-finite loss or gradient are skipped
  // and counted.
  PPOMetrics update(const RolloutBuffer& buffer, Rng& rng);
  const PPOConfig& config() const { return config_; }

 private:
  SkillConditionedPolicy& policy_;
  ValueNet& value_;
  PPOConfig config_;
  nn::Adam optimizer_;
};

}  // namespace skilllab::agents
