#include "skilllab/tabular.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace skilllab::tabular {

nlohmann::json ExtendedReward::to_json() const {
  if (negative_infinity) return "-inf";
  return value;
}

void TabularSkillModel::validate() const {
  if (skills() < 1 || states() < 1) {
    throw std::invalid_argument("tabular model needs at least one skill and state");
  }
  if ((rho.array() < 0.0).any()) {
    throw std::invalid_argument("tabular model has negative probabilities");
  }
  for (int z = 0; z < skills(); ++z) {
    if (std::abs(rho.row(z).sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("rho(.|z=" + std::to_string(z) + ") does not sum to 1");
    }
  }
}

namespace {

void check_indices(const TabularSkillModel& m, int state, int skill) {
  if (state < 0 || state >= m.states()) {
    throw std::out_of_range("unknown state " + std::to_string(state));
  }
  if (skill < 0 || skill >= m.skills()) {
    throw std::out_of_range("unknown skill " + std::to_string(skill));
  }
}

ExtendedReward log_plus_log_n(double p, int n) {
  if (p <= 0.0) return ExtendedReward::minus_infinity();
  return ExtendedReward::finite(std::log(p) + std::log(static_cast<double>(n)));
}

}  // namespace

Eigen::VectorXd exact_posterior(const TabularSkillModel& m, int state) {
  check_indices(m, state, 0);
  const Eigen::VectorXd col = m.rho.col(state);
  const double total = col.sum();
  if (total <= 0.0) return Eigen::VectorXd::Constant(m.skills(), 1.0 / m.skills());
  // The uniform prior cancels in Bayes' rule.
  return col / total;
}

ExtendedReward reverse_reward_exact(const TabularSkillModel& m, int state, int skill) {
  check_indices(m, state, skill);
  const Eigen::VectorXd post = exact_posterior(m, state);
  return log_plus_log_n(post[skill], m.skills());
}

ExtendedReward reverse_reward_background(const TabularSkillModel& m, int state,
                                         int skill) {
  check_indices(m, state, skill);
  if (m.rho.col(state).sum() <= 0.0) return ExtendedReward::minus_infinity();
  return reverse_reward_exact(m, state, skill);
}

ExtendedReward forward_reward_exact(const TabularSkillModel& m, int state, int skill,
                                    double eps) {
  check_indices(m, state, skill);
  if (eps < 0.0) throw std::invalid_argument("eps must be non-negative");
  const Eigen::VectorXd col = m.rho.col(state);
  const int n = m.skills();
  if (eps == 0.0) {
    // Limit form: 1 / (1 + sum_{i != z'} (rho_i + eps) / (rho' + eps)).
    if (col.sum() <= 0.0) return ExtendedReward::finite(0.0);
    if (col[skill] <= 0.0) return ExtendedReward::minus_infinity();
    return log_plus_log_n(col[skill] / col.sum(), n);
  }
  const double num = col[skill] + eps;
  const double den = col.sum() + eps * n;
  return ExtendedReward::finite(std::log(num) - std::log(den) +
                                std::log(static_cast<double>(n)));
}

TabularSkillModel sector_split_model(const env::GridWorldSpec& spec, int skills,
                                     int radius) {
  spec.validate();
  if (skills < 1) throw std::invalid_argument("need at least one skill");
  const auto cells = env::grid_states(spec);
  TabularSkillModel m;
  m.rho = Eigen::MatrixXd::Zero(skills, static_cast<Eigen::Index>(cells.size()));
  const double width = 2.0 * std::numbers::pi / skills;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const int dr = spec.start.row - c.row;
    const int dc = c.col - spec.start.col;
    if (std::abs(dr) + std::abs(dc) > radius) continue;
    const auto si = static_cast<Eigen::Index>(i);
    if (dr == 0 && dc == 0) {
      m.rho.col(si).setOnes();
      continue;
    }
    // Sectors start at the downward direction and proceed counter-clockwise.
    double t = std::atan2(static_cast<double>(dr), static_cast<double>(dc)) +
               std::numbers::pi / 2;
    if (t < 0) t += 2.0 * std::numbers::pi;
    const double s = t / width;
    const double nearest = std::round(s);
    if (std::abs(s - nearest) < 1e-9) {
      const int k = static_cast<int>(nearest) % skills;
      m.rho(k, si) = 1.0;
      m.rho((k + skills - 1) % skills, si) = 1.0;
    } else {
      m.rho(static_cast<int>(std::floor(s)) % skills, si) = 1.0;
    }
  }
  for (int z = 0; z < skills; ++z) {
    const double total = m.rho.row(z).sum();
    m.rho.row(z) /= total;
  }
  return m;
}

GridworldFigure gridworld_figure_export(const TabularSkillModel& m,
                                        const env::GridWorldSpec& spec) {
  m.validate();
  const auto cells = env::grid_states(spec);
  if (static_cast<int>(cells.size()) != m.states()) {
    throw std::invalid_argument("tabular model does not match the gridworld's states");
  }
  GridworldFigure fig;
  fig.rows = spec.rows;
  fig.cols = spec.cols;
  fig.skills = m.skills();
  const std::size_t area = static_cast<std::size_t>(spec.rows * spec.cols);
  fig.wall.assign(area, true);
  fig.rho.assign(fig.skills, std::vector<double>(area, std::nan("")));
  fig.reverse_reward.assign(fig.skills,
                            std::vector<ExtendedReward>(area, ExtendedReward{}));
  fig.forward_reward = fig.reverse_reward;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::size_t flat = static_cast<std::size_t>(cells[i].row * spec.cols + cells[i].col);
    fig.wall[flat] = false;
    for (int z = 0; z < fig.skills; ++z) {
      const int s = static_cast<int>(i);
      fig.rho[z][flat] = m.rho(z, s);
      const auto r = reverse_reward_exact(m, s, z);
      const auto f = forward_reward_exact(m, s, z, 0.0);
      const bool same = r.negative_infinity == f.negative_infinity &&
                        (r.negative_infinity || std::abs(r.value - f.value) <= 1e-9);
      if (!same) {
        throw std::logic_error("reverse and forward landscapes differ at cell (" +
                               std::to_string(cells[i].row) + ", " +
                               std::to_string(cells[i].col) + ")");
      }
      fig.reverse_reward[z][flat] = r;
      fig.forward_reward[z][flat] = f;
    }
  }
  return fig;
}

nlohmann::json GridworldFigure::to_json(const std::string& form) const {
  if (form != "reverse" && form != "forward") {
    throw std::invalid_argument("form must be 'reverse' or 'forward'");
  }
  const auto& rewards = form == "reverse" ? reverse_reward : forward_reward;
  nlohmann::json rho_j = nlohmann::json::array();
  nlohmann::json rew_j = nlohmann::json::array();
  for (int z = 0; z < skills; ++z) {
    nlohmann::json rg = nlohmann::json::array();
    nlohmann::json wg = nlohmann::json::array();
    for (int r = 0; r < rows; ++r) {
      nlohmann::json rrow = nlohmann::json::array();
      nlohmann::json wrow = nlohmann::json::array();
      for (int c = 0; c < cols; ++c) {
        const std::size_t flat = static_cast<std::size_t>(r * cols + c);
        if (wall[flat]) {
          rrow.push_back(nullptr);
          wrow.push_back(nullptr);
        } else {
          rrow.push_back(rho[z][flat]);
          wrow.push_back(rewards[z][flat].to_json());
        }
      }
      rg.push_back(std::move(rrow));
      wg.push_back(std::move(wrow));
    }
    rho_j.push_back(std::move(rg));
    rew_j.push_back(std::move(wg));
  }
  return {{"rows", rows}, {"cols", cols},   {"skills", skills},
          {"rho", rho_j}, {"reward", rew_j}, {"form", form}};
}

}  // namespace skilllab::tabular
