#pragma once

// Paired-rollout relabeling with anti-goal bonuses.

#include <vector>

#include "skilllab/agents/ppo.hpp"
#include "skilllab/env/maze.hpp"

namespace skilllab::pipeline {

struct SiblingDecision {
  double distance_a = 0;  // ||s_T^A - g||
  double distance_b = 0;
  bool admit_a = false;
  bool admit_b = false;
  double bonus = 0;       // min(||s_T^A - s_T^B||, eps), same for both siblings
};

// The sibling farther from the goal is always admitted; the closer one only
// when its distance is below eps. Ties count `b` as the farther one.
SiblingDecision sibling_rivalry_select(const env::Vec2& terminal_a,
                                       const env::Vec2& terminal_b, const env::Vec2& goal,
                                       double eps);
SiblingDecision sibling_rivalry_select(const env::Trajectory& a, const env::Trajectory& b,
                                       const env::Vec2& goal, double eps);

// Applies the rule to episode pairs (0,1), (2,3), ... of a buffer collected
// with paired episodes, adding the bonus to each admitted episode's final
// reward. Returns the admitted episode indices in order.
std::vector<int> apply_sibling_rivalry(agents::RolloutBuffer& buffer,
                                       const nn::Matrix& goals, double eps);

}  // namespace skilllab::pipeline
