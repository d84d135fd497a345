#pragma once

// Intrinsic reward engines. Every engine is a pure function of
// (state, skill, frozen models): evaluation never mutates a model.

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "skilllab/agents/ppo.hpp"
#include "skilllab/density/discriminator.hpp"
#include "skilllab/density/skill_density.hpp"
#include "skilllab/density/vae.hpp"
#include "skilllab/density/vqvae.hpp"
#include "skilllab/env/maze.hpp"

namespace skilllab::rewards {

using nn::Index;
using nn::Matrix;

// Scalar forms.
// log q(z'|s) - log p(z')
double reverse_mi_reward(double log_q_z_given_s, double log_prior);
// log q(s|z') - log((1/N) sum_i q(s|z_i)), from log densities of all skills.
double forward_mi_reward(std::span<const double> log_q_s_given_z, int z);
// log p*(s) - log q(s)
double smm_reward(double log_q_s, double log_target);

enum class RewardKind { kReverseMI, kForwardMI, kEdl, kReverseVq, kSmm };
std::string to_string(RewardKind kind);

class RewardEngine {
 public:
  virtual ~RewardEngine() = default;
  virtual RewardKind kind() const = 0;
  // Number of skills the engine distinguishes; 0 when skill-agnostic.
  virtual int skills() const = 0;
  // One reward per row of `states` for the matching skill in `skills`.
  virtual Eigen::VectorXd rewards(const Matrix& states, std::span<const int> skills) const = 0;
  // Hash of every model parameter the engine reads.
  virtual std::uint64_t checksum() const = 0;

  double reward(const Eigen::VectorXd& state, int skill) const;
  agents::RewardFn as_fn() const;
};

class ReverseMIReward : public RewardEngine {
 public:
  ReverseMIReward(const density::SkillDiscriminator& model, dist::CategoricalDist prior);
  RewardKind kind() const override { return RewardKind::kReverseMI; }
  int skills() const override { return model_.config().skills; }
  Eigen::VectorXd rewards(const Matrix& states, std::span<const int> skills) const override;
  std::uint64_t checksum() const override;

 private:
  const density::SkillDiscriminator& model_;
  dist::CategoricalDist prior_;
};

// Marginal over all skills under a uniform prior, in log space.
class ForwardMIReward : public RewardEngine {
 public:
  explicit ForwardMIReward(const density::SkillDensityModel& model) : model_(model) {}
  RewardKind kind() const override { return RewardKind::kForwardMI; }
  int skills() const override { return model_.config().skills; }
  Eigen::VectorXd rewards(const Matrix& states, std::span<const int> skills) const override;
  std::uint64_t checksum() const override;

 private:
  const density::SkillDensityModel& model_;
};

// log N(s; g_z, I) with g_z the decoded mean of code z, in state units.
// Goals are read once at construction.
class EdlReward : public RewardEngine {
 public:
  explicit EdlReward(const density::VqVae& model);
  explicit EdlReward(Matrix goals);
  RewardKind kind() const override { return RewardKind::kEdl; }
  int skills() const override { return static_cast<int>(goals_.rows()); }
  Eigen::VectorXd rewards(const Matrix& states, std::span<const int> skills) const override;
  std::uint64_t checksum() const override { return checksum_; }
  const Matrix& goals() const { return goals_; }

 private:
  Matrix goals_;
  std::uint64_t checksum_;
};

// 1 where the one-hot VQ posterior selects z', else 0.
class ReverseVqReward : public RewardEngine {
 public:
  explicit ReverseVqReward(const density::VqVae& model) : model_(model) {}
  RewardKind kind() const override { return RewardKind::kReverseVq; }
  int skills() const override { return model_.config().codes; }
  Eigen::VectorXd rewards(const Matrix& states, std::span<const int> skills) const override;
  std::uint64_t checksum() const override { return model_.checksum(); }

 private:
  const density::VqVae& model_;
};

// log p*(s) - log q(s) with a uniform target over `free_area` and q(s) the
// VAE's importance-weighted estimate. A fixed sampling seed keeps repeated
// evaluations identical.
class SmmReward : public RewardEngine {
 public:
  SmmReward(const density::GaussianVAE& model, double free_area,
            std::uint64_t seed = 0x5eed);
  RewardKind kind() const override { return RewardKind::kSmm; }
  int skills() const override { return 0; }
  Eigen::VectorXd rewards(const Matrix& states, std::span<const int> skills) const override;
  std::uint64_t checksum() const override;
  double log_target() const { return log_target_; }

 private:
  const density::GaussianVAE& model_;
  double log_target_;
  std::uint64_t seed_;
};

struct Landscape {
  std::string maze;
  int skill = 0;
  int resolution = 0;
  std::array<double, 4> extent{};  // x0, y0, x1, y1
  std::vector<double> values;      // row-major, row = y index

  // Cell-center coordinates of grid index (ix, iy).
  env::Vec2 point(int ix, int iy) const;
  // Grid index of the maximum value (first on ties).
  std::pair<int, int> argmax() const;
  nlohmann::json to_json() const;
};

Landscape reward_landscape(const RewardEngine& engine, const env::MazeSpec& spec, int skill,
                           int resolution);

}  // namespace skilllab::rewards
