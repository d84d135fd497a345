#include "skilllab/rewards.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace skilllab::rewards {

namespace {
void check_rows(const Matrix& states, std::span<const int> skills, int n) {
  if (static_cast<Index>(skills.size()) != states.rows()) {
    throw nn::ShapeError("reward engine: one skill per state required");
  }
  if (n > 0) {
    for (int z : skills) {
      if (z < 0 || z >= n) throw std::out_of_range("reward engine: skill out of range");
    }
  }
}

double logsumexp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}
}  // namespace

double reverse_mi_reward(double log_q_z_given_s, double log_prior) {
  return log_q_z_given_s - log_prior;
}

double forward_mi_reward(std::span<const double> log_q, int z) {
  if (z < 0 || z >= static_cast<int>(log_q.size())) {
    throw std::out_of_range("forward_mi_reward: skill out of range");
  }
  const double n = static_cast<double>(log_q.size());
  const double lse = logsumexp(log_q);
  // every density zero: all skills tie
  if (!std::isfinite(lse)) return 0.0;
  return log_q[static_cast<std::size_t>(z)] - (lse - std::log(n));
}

double smm_reward(double log_q_s, double log_target) { return log_target - log_q_s; }

std::string to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::kReverseMI: return "reverse";
    case RewardKind::kForwardMI: return "forward";
    case RewardKind::kEdl: return "edl";
    case RewardKind::kReverseVq: return "reverse_vq";
    case RewardKind::kSmm: return "smm";
  }
  return "unknown";
}

double RewardEngine::reward(const Eigen::VectorXd& state, int skill) const {
  const int z[1] = {skill};
  return rewards(state.transpose(), z)[0];
}

agents::RewardFn RewardEngine::as_fn() const {
  return [this](const Matrix& s, std::span<const int> z) { return rewards(s, z); };
}

ReverseMIReward::ReverseMIReward(const density::SkillDiscriminator& model,
                                 dist::CategoricalDist prior)
    : model_(model), prior_(std::move(prior)) {
  if (prior_.probs.size() != model_.config().skills) {
    throw nn::ShapeError("ReverseMIReward: prior size differs from skill count");
  }
}

Eigen::VectorXd ReverseMIReward::rewards(const Matrix& states,
                                         std::span<const int> skills) const {
  check_rows(states, skills, this->skills());
  const Matrix lq = model_.log_probs(states);
  Eigen::VectorXd r(states.rows());
  for (Index i = 0; i < states.rows(); ++i) {
    const int z = skills[i];
    r[i] = reverse_mi_reward(lq(i, z), std::log(prior_.probs[z]));
  }
  return r;
}

std::uint64_t ReverseMIReward::checksum() const {
  return nn::parameter_checksum(model_.parameters());
}

Eigen::VectorXd ForwardMIReward::rewards(const Matrix& states,
                                         std::span<const int> skills) const {
  check_rows(states, skills, this->skills());
  const Matrix lq = model_.log_probs(states);
  Eigen::VectorXd r(states.rows());
  for (Index i = 0; i < states.rows(); ++i) {
    r[i] = forward_mi_reward({lq.row(i).data(), static_cast<std::size_t>(lq.cols())},
                             skills[i]);
  }
  return r;
}

std::uint64_t ForwardMIReward::checksum() const {
  return nn::parameter_checksum(model_.parameters());
}

EdlReward::EdlReward(const density::VqVae& model)
    : goals_(model.decoder_means()), checksum_(model.checksum()) {}

EdlReward::EdlReward(Matrix goals) : goals_(std::move(goals)) {
  checksum_ = nn::parameter_checksum({nn::Var::constant(goals_)});
}

Eigen::VectorXd EdlReward::rewards(const Matrix& states, std::span<const int> skills) const {
  check_rows(states, skills, this->skills());
  const Index d = goals_.cols();
  const double c = -0.5 * dist::kLog2Pi * static_cast<double>(d);
  Eigen::VectorXd r(states.rows());
  for (Index i = 0; i < states.rows(); ++i) {
    r[i] = -0.5 * (states.row(i) - goals_.row(skills[i])).squaredNorm() + c;
  }
  return r;
}

Eigen::VectorXd ReverseVqReward::rewards(const Matrix& states,
                                         std::span<const int> skills) const {
  check_rows(states, skills, this->skills());
  const auto idx = model_.assign(states);
  Eigen::VectorXd r(states.rows());
  for (Index i = 0; i < states.rows(); ++i) {
    r[i] = idx[static_cast<std::size_t>(i)] == skills[i] ? 1.0 : 0.0;
  }
  return r;
}

SmmReward::SmmReward(const density::GaussianVAE& model, double free_area,
                     std::uint64_t seed)
    : model_(model), seed_(seed) {
  if (!(free_area > 0)) throw std::invalid_argument("SmmReward: free area must be positive");
  log_target_ = -std::log(free_area);
}

Eigen::VectorXd SmmReward::rewards(const Matrix& states, std::span<const int> skills) const {
  check_rows(states, skills, 0);
  nn::Rng rng(seed_);
  const Eigen::VectorXd lq = model_.log_density(states, rng);
  Eigen::VectorXd r(states.rows());
  for (Index i = 0; i < states.rows(); ++i) r[i] = smm_reward(lq[i], log_target_);
  return r;
}

std::uint64_t SmmReward::checksum() const {
  return nn::parameter_checksum(model_.parameters());
}

env::Vec2 Landscape::point(int ix, int iy) const {
  const double w = (extent[2] - extent[0]) / resolution;
  const double h = (extent[3] - extent[1]) / resolution;
  return {extent[0] + (ix + 0.5) * w, extent[1] + (iy + 0.5) * h};
}

std::pair<int, int> Landscape::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return {static_cast<int>(best % static_cast<std::size_t>(resolution)),
          static_cast<int>(best / static_cast<std::size_t>(resolution))};
}

nlohmann::json Landscape::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  const auto n = static_cast<std::size_t>(resolution);
  for (std::size_t iy = 0; iy < n; ++iy) {
    rows.push_back(std::vector<double>(values.begin() + static_cast<long>(iy * n),
                                       values.begin() + static_cast<long>((iy + 1) * n)));
  }
  const auto [ax, ay] = argmax();
  return {{"maze", maze},
          {"skill", skill},
          {"resolution", resolution},
          {"extent", extent},
          {"argmax", {point(ax, ay).x(), point(ax, ay).y()}},
          {"values", rows}};
}

Landscape reward_landscape(const RewardEngine& engine, const env::MazeSpec& spec, int skill,
                           int resolution) {
  if (resolution < 2) throw std::invalid_argument("reward_landscape: resolution must be >= 2");
  Landscape l;
  l.maze = spec.name;
  l.skill = skill;
  l.resolution = resolution;
  l.extent = {0.0, 0.0, spec.width, spec.height};
  Matrix pts(static_cast<Index>(resolution) * resolution, 2);
  for (int iy = 0; iy < resolution; ++iy) {
    for (int ix = 0; ix < resolution; ++ix) {
      pts.row(static_cast<Index>(iy) * resolution + ix) = l.point(ix, iy).transpose();
    }
  }
  const std::vector<int> z(static_cast<std::size_t>(pts.rows()), skill);
  const Eigen::VectorXd r = engine.rewards(pts, z);
  l.values.assign(r.data(), r.data() + r.size());
  return l;
}

}  // namespace skilllab::rewards
