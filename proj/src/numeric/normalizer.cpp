#include "skilllab/numeric/normalizer.hpp"

namespace skilllab::nn {

RunningNormalizer::RunningNormalizer(Index dim)
    : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

void RunningNormalizer::check_dim(Index d) const {
  if (d != dim()) {
    throw ShapeError("RunningNormalizer: expected dimension " +
                     std::to_string(dim()) + ", got " + std::to_string(d));
  }
}

Eigen::VectorXd RunningNormalizer::variance() const {
  if (count_ == 0) return Eigen::VectorXd::Ones(dim());
  return m2_ / static_cast<double>(count_);
}

void RunningNormalizer::observe(const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dim(x.size());
  ++count_;
  const Eigen::VectorXd delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_.array() += delta.array() * (x - mean_).array();
}

void RunningNormalizer::observe_rows(const Matrix& rows) {
  for (Index i = 0; i < rows.rows(); ++i) observe(rows.row(i).transpose());
}

Eigen::VectorXd RunningNormalizer::normalize(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_dim(x.size());
  if (count_ == 0) return x;
  return ((x - mean_).array() / (variance().array() + kEpsilon).sqrt()).matrix();
}

Eigen::VectorXd RunningNormalizer::denormalize(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_dim(x.size());
  if (count_ == 0) return x;
  return (x.array() * (variance().array() + kEpsilon).sqrt()).matrix() + mean_;
}

Matrix RunningNormalizer::normalize_rows(const Matrix& rows) const {
  check_dim(rows.cols());
  if (count_ == 0) return rows;
  const Eigen::RowVectorXd scale =
      (variance().array() + kEpsilon).sqrt().inverse().matrix().transpose();
  Matrix out = rows.rowwise() - mean_.transpose();
  out.array().rowwise() *= scale.array();
  return out;
}

Matrix RunningNormalizer::denormalize_rows(const Matrix& rows) const {
  check_dim(rows.cols());
  if (count_ == 0) return rows;
  const Eigen::RowVectorXd scale =
      (variance().array() + kEpsilon).sqrt().matrix().transpose();
  Matrix out = rows;
  out.array().rowwise() *= scale.array();
  out.rowwise() += mean_.transpose();
  return out;
}

nlohmann::json RunningNormalizer::to_json() const {
  return {{"count", count_},
          {"mean", std::vector<double>(mean_.data(), mean_.data() + mean_.size())},
          {"m2", std::vector<double>(m2_.data(), m2_.data() + m2_.size())}};
}

RunningNormalizer RunningNormalizer::from_json(const nlohmann::json& j) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto m2 = j.at("m2").get<std::vector<double>>();
  if (mean.size() != m2.size()) {
    throw ShapeError("RunningNormalizer: mean/m2 length mismatch");
  }
  RunningNormalizer n(static_cast<Index>(mean.size()));
  n.count_ = j.at("count").get<long>();
  n.mean_ = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
  n.m2_ = Eigen::Map<const Eigen::VectorXd>(m2.data(), m2.size());
  return n;
}

}  // namespace skilllab::nn
