#include "skilllab/pipeline/sibling_rivalry.hpp"

#include <algorithm>
#include <stdexcept>

namespace skilllab::pipeline {

SiblingDecision sibling_rivalry_select(const env::Vec2& terminal_a,
                                       const env::Vec2& terminal_b, const env::Vec2& goal,
                                       double eps) {
  SiblingDecision d;
  d.distance_a = (terminal_a - goal).norm();
  d.distance_b = (terminal_b - goal).norm();
  d.bonus = std::min((terminal_a - terminal_b).norm(), eps);
  if (d.distance_a > d.distance_b) {
    d.admit_a = true;
    d.admit_b = d.distance_b < eps;
  } else {
    d.admit_b = true;
    d.admit_a = d.distance_a < eps;
  }
  return d;
}

SiblingDecision sibling_rivalry_select(const env::Trajectory& a, const env::Trajectory& b,
                                       const env::Vec2& goal, double eps) {
  if (a.skill != b.skill) throw std::invalid_argument("siblings must share a skill");
  return sibling_rivalry_select(a.final_state(), b.final_state(), goal, eps);
}

std::vector<int> apply_sibling_rivalry(agents::RolloutBuffer& buffer, const nn::Matrix& goals,
                                       double eps) {
  if (buffer.episodes() % 2 != 0) {
    throw std::invalid_argument("sibling rivalry needs an even number of episodes");
  }
  std::vector<int> admitted;
  for (int e = 0; e < buffer.episodes(); e += 2) {
    const int z = buffer.episode_skill[e];
    if (buffer.episode_skill[e + 1] != z) {
      throw std::invalid_argument("sibling episodes must share a skill");
    }
    const int last_a = buffer.episode_start[e] + buffer.episode_length(e) - 1;
    const int last_b = buffer.episode_start[e + 1] + buffer.episode_length(e + 1) - 1;
    const env::Vec2 ta = buffer.next_states.row(last_a).transpose();
    const env::Vec2 tb = buffer.next_states.row(last_b).transpose();
    const env::Vec2 g = goals.row(z).transpose();
    const SiblingDecision d = sibling_rivalry_select(ta, tb, g, eps);
    if (d.admit_a) {
      buffer.rewards[last_a] += d.bonus;
      admitted.push_back(e);
    }
    if (d.admit_b) {
      buffer.rewards[last_b] += d.bonus;
      admitted.push_back(e + 1);
    }
  }
  return admitted;
}

}  // namespace skilllab::pipeline
