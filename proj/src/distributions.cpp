#include "skilllab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace skilllab::dist {

namespace {

double unit_position(double a, double low, double high) {
  if (!(a >= low && a <= high)) {
    throw std::out_of_range("action " + std::to_string(a) + " outside [" +
                            std::to_string(low) + ", " + std::to_string(high) +
                            "]");
  }
  const double u = (a - low) / (high - low);
  return std::clamp(u, kBetaMargin, 1.0 - kBetaMargin);
}

double log_beta_fn(double a, double b) {
  return nn::lgamma(a) + nn::lgamma(b) - nn::lgamma(a + b);
}

}  // namespace

Eigen::VectorXd ScaledBeta::mean() const {
  const Eigen::ArrayXd u = alpha.array() / (alpha.array() + beta.array());
  return (low.array() + u * (high - low).array()).matrix();
}

ScaledBeta make_scaled_beta(Eigen::VectorXd alpha, Eigen::VectorXd beta,
                            double low, double high) {
  if (alpha.size() != beta.size()) {
    throw nn::ShapeError("ScaledBeta: alpha/beta dimension mismatch");
  }
  if (!(high > low)) throw std::invalid_argument("ScaledBeta: high must exceed low");
  if (!(alpha.array() > 0.0).all() || !(beta.array() > 0.0).all()) {
    throw std::invalid_argument("ScaledBeta: shape parameters must be positive");
  }
  const auto n = alpha.size();
  return {std::move(alpha), std::move(beta), Eigen::VectorXd::Constant(n, low),
          Eigen::VectorXd::Constant(n, high)};
}

Eigen::VectorXd beta_sample(const ScaledBeta& d, Rng& rng) {
  Eigen::VectorXd out(d.dim());
  for (Eigen::Index i = 0; i < d.dim(); ++i) {
    std::gamma_distribution<double> ga(d.alpha[i], 1.0);
    std::gamma_distribution<double> gb(d.beta[i], 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    const double u = (x + y) > 0.0 ? x / (x + y) : 0.5;
    out[i] = std::clamp(d.low[i] + u * (d.high[i] - d.low[i]), d.low[i], d.high[i]);
  }
  return out;
}

double beta_log_prob(const ScaledBeta& d, const Eigen::VectorXd& action) {
  if (action.size() != d.dim()) {
    throw nn::ShapeError("beta_log_prob: action dimension mismatch");
  }
  double lp = 0.0;
  for (Eigen::Index i = 0; i < d.dim(); ++i) {
    const double u = unit_position(action[i], d.low[i], d.high[i]);
    const double a = d.alpha[i], b = d.beta[i];
    lp += (a - 1.0) * std::log(u) + (b - 1.0) * std::log1p(-u) - log_beta_fn(a, b) -
          std::log(d.high[i] - d.low[i]);
  }
  return lp;
}

double beta_entropy(const ScaledBeta& d) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < d.dim(); ++i) {
    const double a = d.alpha[i], b = d.beta[i];
    h += log_beta_fn(a, b) - (a - 1.0) * nn::digamma(a) - (b - 1.0) * nn::digamma(b) +
         (a + b - 2.0) * nn::digamma(a + b) + std::log(d.high[i] - d.low[i]);
  }
  return h;
}

Var beta_log_prob(const Var& alpha, const Var& beta, const Matrix& actions,
                  double low, double high) {
  if (alpha.shape() != beta.shape() ||
      alpha.shape() != nn::Shape{actions.rows(), actions.cols()}) {
    throw nn::ShapeError("beta_log_prob: alpha, beta and actions must share a shape");
  }
  Matrix log_u(actions.rows(), actions.cols());
  Matrix log_1mu(actions.rows(), actions.cols());
  for (nn::Index i = 0; i < actions.size(); ++i) {
    const double u = unit_position(actions.data()[i], low, high);
    log_u.data()[i] = std::log(u);
    log_1mu.data()[i] = std::log1p(-u);
  }
  const double width = static_cast<double>(actions.cols()) * std::log(high - low);
  Var lp = (alpha - 1.0) * Var::constant(std::move(log_u)) +
           (beta - 1.0) * Var::constant(std::move(log_1mu)) -
           (nn::lgamma(alpha) + nn::lgamma(beta) - nn::lgamma(alpha + beta));
  return nn::add_scalar(nn::sum_rows(lp), -width);
}

Var beta_entropy(const Var& alpha, const Var& beta, double low, double high) {
  const double width = static_cast<double>(alpha.cols()) * std::log(high - low);
  Var ab = alpha + beta;
  Var h = nn::lgamma(alpha) + nn::lgamma(beta) - nn::lgamma(ab) -
          (alpha - 1.0) * nn::digamma(alpha) - (beta - 1.0) * nn::digamma(beta) +
          (ab - 2.0) * nn::digamma(ab);
  return nn::add_scalar(nn::sum_rows(h), width);
}

CategoricalDist CategoricalDist::uniform(int k) {
  if (k <= 0) throw std::invalid_argument("Categorical: need at least one outcome");
  return {Eigen::VectorXd::Constant(k, 1.0 / k)};
}

CategoricalDist CategoricalDist::from_logits(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - m).exp().matrix();
  p /= p.sum();
  return {p};
}

int categorical_sample(const CategoricalDist& d, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (int k = 0; k < d.size(); ++k) {
    if (d.probs[k] > 0.0) last_positive = k;
    acc += d.probs[k];
    if (r < acc && d.probs[k] > 0.0) return k;
  }
  return last_positive;
}

double categorical_log_prob(const CategoricalDist& d, int k) {
  if (k < 0 || k >= d.size()) {
    throw std::out_of_range("categorical outcome " + std::to_string(k) +
                            " not in [0, " + std::to_string(d.size()) + ")");
  }
  return std::log(d.probs[k]);
}

double gaussian_log_prob(const DiagGaussian& d, const Eigen::VectorXd& x) {
  if (x.size() != d.mean.size() || d.log_std.size() != d.mean.size()) {
    throw nn::ShapeError("gaussian_log_prob: dimension mismatch");
  }
  const Eigen::ArrayXd z = (x - d.mean).array() / d.log_std.array().exp();
  return (-0.5 * z.square() - d.log_std.array() - 0.5 * kLog2Pi).sum();
}

Eigen::VectorXd gaussian_log_prob_rows(const Matrix& mean, const Matrix& log_std,
                                       const Matrix& x) {
  if (mean.rows() != x.rows() || mean.cols() != x.cols() ||
      log_std.cols() != x.cols() ||
      (log_std.rows() != 1 && log_std.rows() != x.rows())) {
    throw nn::ShapeError("gaussian_log_prob_rows: shape mismatch");
  }
  Eigen::VectorXd out(x.rows());
  for (nn::Index i = 0; i < x.rows(); ++i) {
    const auto ls = log_std.row(log_std.rows() == 1 ? 0 : i).array();
    const auto z = (x.row(i) - mean.row(i)).array() / ls.exp();
    out[i] = (-0.5 * z.square() - ls - 0.5 * kLog2Pi).sum();
  }
  return out;
}

Var gaussian_log_prob(const Var& mean, const Var& log_std, const Matrix& x) {
  Var z = (Var::constant(x) - mean) / nn::exp(log_std);
  Var per_dim = nn::scale(nn::square(z), -0.5) - log_std;
  Var lp = nn::sum_rows(per_dim);
  if (lp.rows() != x.rows()) lp = nn::broadcast_to(lp, x.rows(), 1);
  return nn::add_scalar(lp, -0.5 * kLog2Pi * static_cast<double>(x.cols()));
}

}  // namespace skilllab::dist
