#pragma once

#include <span>
#include <vector>

#include "skilllab/numeric/autodiff.hpp"

namespace skilllab::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment accumulators for one parameter list. Moment shapes mirror the
// parameters they were created for.
struct AdamState {
  AdamConfig config;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  long step = 0;
};

AdamState make_adam_state(std::span<const Var> params, AdamConfig config);

// Bias-corrected Adam update using each parameter's accumulated grad.
// Throws NonFiniteError, leaving parameters and state untouched, when any
// gradient is NaN or infinite.
void adam_step(std::span<Var> params, AdamState& state);

class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Var> params, AdamConfig config);

  void step() { adam_step(params_, state_); }
  void zero_grad();
  const AdamState& state() const { return state_; }
  std::vector<Var>& params() { return params_; }
  void set_lr(double lr) { state_.config.lr = lr; }

 private:
  std::vector<Var> params_;
  AdamState state_;
};

// Rescales gradients in place so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(std::span<Var> params, double max_norm);

}  // namespace skilllab::nn
