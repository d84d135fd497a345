#pragma once

// Probability heads: scaled Beta (bounded continuous actions), Categorical
// (skills, VQ posterior) and diagonal Gaussian (decoders, density heads).
// Each family has a plain-value API and, where training needs it, a
// differentiable batched counterpart operating on nn::Var rows.

#include <Eigen/Dense>

#include "skilllab/numeric/autodiff.hpp"
#include "skilllab/numeric/mlp.hpp"

namespace skilllab::dist {

using nn::Matrix;
using nn::Rng;
using nn::Var;

inline constexpr double kLog2Pi = 1.8378770664093453;
// Actions are pulled this far inside the unit interval before log_prob.
inline constexpr double kBetaMargin = 1e-6;

struct ScaledBeta {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  Eigen::VectorXd low;
  Eigen::VectorXd high;

  Eigen::Index dim() const { return alpha.size(); }
  Eigen::VectorXd mean() const;
};

ScaledBeta make_scaled_beta(Eigen::VectorXd alpha, Eigen::VectorXd beta,
                            double low, double high);

Eigen::VectorXd beta_sample(const ScaledBeta& d, Rng& rng);
// Summed over dimensions, including the -log(high - low) Jacobian term.
// Throws std::out_of_range for actions outside [low, high].
double beta_log_prob(const ScaledBeta& d, const Eigen::VectorXd& action);
double beta_entropy(const ScaledBeta& d);

// Batched, differentiable in alpha/beta. Rows are independent samples;
// the result is rows x 1.
Var beta_log_prob(const Var& alpha, const Var& beta, const Matrix& actions,
                  double low, double high);
Var beta_entropy(const Var& alpha, const Var& beta, double low, double high);

struct CategoricalDist {
  Eigen::VectorXd probs;

  static CategoricalDist uniform(int k);
  static CategoricalDist from_logits(const Eigen::VectorXd& logits);
  int size() const { return static_cast<int>(probs.size()); }
};

int categorical_sample(const CategoricalDist& d, Rng& rng);
// Throws std::out_of_range when k is not a valid outcome.
double categorical_log_prob(const CategoricalDist& d, int k);

struct DiagGaussian {
  Eigen::VectorXd mean;
  Eigen::VectorXd log_std;
};

double gaussian_log_prob(const DiagGaussian& d, const Eigen::VectorXd& x);
// Row-wise log N(x_i; mean_i, diag(exp(log_std_i))^2). `log_std` may be a
// single row that is shared by every sample.
Eigen::VectorXd gaussian_log_prob_rows(const Matrix& mean, const Matrix& log_std,
                                       const Matrix& x);
Var gaussian_log_prob(const Var& mean, const Var& log_std, const Matrix& x);

}  // namespace skilllab::dist
