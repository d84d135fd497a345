#pragma once

// Closed-form reward analysis for N discrete skills on a finite state space,
// given exact stationary distributions rho(s|z) and a uniform prior.

#include <Eigen/Dense>

#include <vector>

#include <nlohmann/json.hpp>

#include "skilllab/env/gridworld.hpp"

namespace skilllab::tabular {

// A reward that may be minus infinity. The infinite case is carried as a
// flag so no float infinity ever enters downstream arithmetic.
struct ExtendedReward {
  double value = 0.0;
  bool negative_infinity = false;

  static ExtendedReward finite(double v) { return {v, false}; }
  static ExtendedReward minus_infinity() { return {0.0, true}; }
  nlohmann::json to_json() const;
};

struct TabularSkillModel {
  // rho(z, s): row z is the distribution over states induced by skill z.
  Eigen::MatrixXd rho;

  int skills() const { return static_cast<int>(rho.rows()); }
  int states() const { return static_cast<int>(rho.cols()); }
  // Throws std::invalid_argument unless rows are distributions (tol 1e-12).
  void validate() const;
};

// Bayes posterior under the uniform prior; uniform for states no skill visits.
// Throws std::out_of_range for an unknown state index.
Eigen::VectorXd exact_posterior(const TabularSkillModel& m, int state);

// log rho(z'|s) + log N.
ExtendedReward reverse_reward_exact(const TabularSkillModel& m, int state, int skill);
// As above, but a background class takes all mass of unseen states, so
// every real skill gets posterior zero there.
ExtendedReward reverse_reward_background(const TabularSkillModel& m, int state,
                                         int skill);
// log((rho(s|z') + eps) / sum_i (rho(s|z_i) + eps)) + log N. With eps == 0
// the ratio is taken in its limit form, which is 1/N when no skill visits s.
ExtendedReward forward_reward_exact(const TabularSkillModel& m, int state, int skill,
                                    double eps);

// Skills split the tiles within manhattan distance `radius` of the spawn
// into N angular sectors around it (two skills give a left/right split with
// the spawn column shared). Each skill is uniform over its sector plus the
// spawn tile; everything else is unseen.
TabularSkillModel sector_split_model(const env::GridWorldSpec& spec, int skills,
                                     int radius = 2);

struct GridworldFigure {
  int rows = 0;
  int cols = 0;
  int skills = 0;
  // Indexed [skill][row * cols + col]; wall cells hold NaN in rho and are
  // flagged in `wall`.
  std::vector<std::vector<double>> rho;
  std::vector<std::vector<ExtendedReward>> reverse_reward;
  std::vector<std::vector<ExtendedReward>> forward_reward;
  std::vector<bool> wall;

  // {rows, cols, skills, rho, reward, form}; form is "reverse" or "forward".
  nlohmann::json to_json(const std::string& form) const;
};

// Evaluates both reward forms over the grid. Throws std::logic_error if the
// two landscapes differ anywhere by more than 1e-9.
GridworldFigure gridworld_figure_export(const TabularSkillModel& m,
                                        const env::GridWorldSpec& spec);

}  // namespace skilllab::tabular
