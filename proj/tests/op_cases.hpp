#pragma once

// Finite-difference cases for every differentiable op, shared by the unit
// tests and the acceptance suite.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "test_util.hpp"

namespace skilllab::testing {

using Fn = std::function<Var(const std::vector<Var>&)>;

struct OpCase {
  Fn f;
  std::vector<std::pair<Index, Index>> shapes;
  double lo = -1.0;
  double hi = 1.0;
};

// Every differentiable op, reduced to a scalar through a fixed random
// weighting so each output entry's gradient is exercised.
inline std::map<std::string, OpCase> op_cases() {
  using namespace nn;
  static const std::vector<int> idx3 = {2, 0, 1};
  auto weighted = [](const Var& v) {
    std::mt19937_64 rng(99);
    return sum(v * Var::constant(random_matrix(v.rows(), v.cols(), rng)));
  };
  std::map<std::string, OpCase> c;
  c["add"] = {[=](auto& p) { return weighted(p[0] + p[1]); }, {{3, 4}, {3, 4}}};
  c["add_broadcast_row"] = {[=](auto& p) { return weighted(p[0] + p[1]); }, {{3, 4}, {1, 4}}};
  c["sub"] = {[=](auto& p) { return weighted(p[0] - p[1]); }, {{3, 4}, {3, 1}}};
  c["mul"] = {[=](auto& p) { return weighted(p[0] * p[1]); }, {{3, 4}, {3, 4}}};
  c["div"] = {[=](auto& p) { return weighted(p[0] / p[1]); }, {{3, 4}, {3, 4}}, 0.5, 2.0};
  c["minimum"] = {[=](auto& p) { return weighted(minimum(p[0], p[1])); }, {{3, 4}, {3, 4}}};
  c["neg"] = {[=](auto& p) { return weighted(-p[0]); }, {{2, 5}}};
  c["scale"] = {[=](auto& p) { return weighted(scale(p[0], -2.5)); }, {{2, 5}}};
  c["add_scalar"] = {[=](auto& p) { return weighted(add_scalar(p[0], 3.0)); }, {{2, 5}}};
  c["matmul"] = {[=](auto& p) { return weighted(matmul(p[0], p[1])); }, {{3, 4}, {4, 2}}};
  c["exp"] = {[=](auto& p) { return weighted(exp(p[0])); }, {{3, 3}}};
  c["log"] = {[=](auto& p) { return weighted(log(p[0])); }, {{3, 3}}, 0.2, 3.0};
  c["softplus"] = {[=](auto& p) { return weighted(softplus(p[0])); }, {{3, 3}}, -4, 4};
  c["relu"] = {[=](auto& p) { return weighted(relu(p[0])); }, {{3, 3}}};
  c["sigmoid"] = {[=](auto& p) { return weighted(sigmoid(p[0])); }, {{3, 3}}, -4, 4};
  c["square"] = {[=](auto& p) { return weighted(square(p[0])); }, {{3, 3}}};
  c["clamp"] = {[=](auto& p) { return weighted(clamp(p[0], -0.5, 0.5)); }, {{4, 4}}};
  c["lgamma"] = {[=](auto& p) { return weighted(lgamma(p[0])); }, {{3, 3}}, 0.5, 6};
  c["digamma"] = {[=](auto& p) { return weighted(digamma(p[0])); }, {{3, 3}}, 0.5, 6};
  c["sum"] = {[=](auto& p) { return sum(p[0]) * sum(p[0]); }, {{3, 2}}};
  c["mean"] = {[=](auto& p) { return square(mean(p[0])); }, {{3, 2}}};
  c["sum_rows"] = {[=](auto& p) { return weighted(sum_rows(p[0])); }, {{3, 4}}};
  c["sum_cols"] = {[=](auto& p) { return weighted(sum_cols(p[0])); }, {{3, 4}}};
  c["mean_cols"] = {[=](auto& p) { return weighted(mean_cols(p[0])); }, {{3, 4}}};
  c["broadcast_to"] = {[=](auto& p) { return weighted(broadcast_to(p[0], 3, 4)); }, {{1, 4}}};
  c["broadcast_scalar"] = {[=](auto& p) { return weighted(broadcast_to(p[0], 2, 3)); }, {{1, 1}}};
  c["concat_cols"] = {[=](auto& p) {
                        std::vector<Var> parts = {p[0], p[1]};
                        return weighted(concat_cols(parts));
                      },
                      {{3, 2}, {3, 3}}};
  c["slice_cols"] = {[=](auto& p) { return weighted(slice_cols(p[0], 1, 2)); }, {{3, 4}}};
  c["gather"] = {[=](auto& p) { return weighted(gather(p[0], idx3)); }, {{3, 4}}};
  c["gather_rows"] = {[=](auto& p) { return weighted(gather_rows(p[0], idx3)); }, {{3, 4}}};
  c["log_softmax"] = {[=](auto& p) { return weighted(log_softmax(p[0])); }, {{3, 5}}, -3, 3};
  c["logsumexp_rows"] = {[=](auto& p) { return weighted(logsumexp_rows(p[0])); }, {{3, 5}}, -3, 3};
  c["composite_mlp"] = {[=](auto& p) { return sum(relu(matmul(p[1], p[0]))); }, {{4, 1}, {3, 4}}};
  return c;
}

}  // namespace skilllab::testing
