#pragma once

#include <nlohmann/json.hpp>

#include "skilllab/numeric/autodiff.hpp"

namespace skilllab::nn {

// Per-dimension running mean/variance (Welford). With zero observations the
// map is the identity. Statistics change only through observe().
class RunningNormalizer {
 public:
  static constexpr double kEpsilon = 1e-8;

  RunningNormalizer() = default;
  explicit RunningNormalizer(Index dim);

  Index dim() const { return mean_.size(); }
  long count() const { return count_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::VectorXd variance() const;

  void observe(const Eigen::Ref<const Eigen::VectorXd>& x);
  // Observes every row of a batch.
  void observe_rows(const Matrix& rows);

  Eigen::VectorXd normalize(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd denormalize(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Matrix normalize_rows(const Matrix& rows) const;
  Matrix denormalize_rows(const Matrix& rows) const;

  nlohmann::json to_json() const;
  static RunningNormalizer from_json(const nlohmann::json& j);

 private:
  void check_dim(Index d) const;

  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
  long count_ = 0;
};

}  // namespace skilllab::nn
