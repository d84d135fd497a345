#include "skilllab/numeric/optim.hpp"

#include <cmath>

namespace skilllab::nn {

AdamState make_adam_state(std::span<const Var> params, AdamConfig config) {
  AdamState state;
  state.config = config;
  for (const auto& p : params) {
    state.first_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
    state.second_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
  return state;
}

void adam_step(std::span<Var> params, AdamState& state) {
  if (params.size() != state.first_moment.size()) {
    throw ShapeError("adam_step: parameter count does not match state");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != Shape{state.first_moment[i].rows(),
                                   state.first_moment[i].cols()}) {
      throw ShapeError("adam_step: parameter " + std::to_string(i) +
                       " has shape " + params[i].shape().str());
    }
    if (!params[i].grad().allFinite()) {
      throw NonFiniteError("adam_step: non-finite gradient in parameter " +
                           std::to_string(i));
    }
  }

  const AdamConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = params[i].grad();
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    params[i].mutable_value().array() -=
        c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.epsilon);
  }
}

Adam::Adam(std::vector<Var> params, AdamConfig config)
    : params_(std::move(params)), state_(make_adam_state(params_, config)) {}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

double clip_grad_norm(std::span<Var> params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) sq += p.grad().squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && std::isfinite(norm)) {
    const double s = max_norm / (norm + 1e-12);
    for (auto& p : params) {
      Matrix g = p.grad() * s;
      p.zero_grad();
      p.node()->accumulate(g);
    }
  }
  return norm;
}

}  // namespace skilllab::nn
