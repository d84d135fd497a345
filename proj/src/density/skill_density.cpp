#include "skilllab/density/skill_density.hpp"

#include <algorithm>
#include <numeric>

namespace skilllab::density {

nlohmann::json SkillDensityConfig::to_json() const {
  return {{"state_dim", state_dim},       {"skills", skills},
          {"hidden_units", hidden_units}, {"hidden_layers", hidden_layers},
          {"lr", lr},                     {"batch_size", batch_size},
          {"min_log_std", min_log_std},   {"max_log_std", max_log_std},
          {"normalize_input", normalize_input}};
}

SkillDensityConfig SkillDensityConfig::from_json(const nlohmann::json& j) {
  SkillDensityConfig c;
  c.state_dim = j.at("state_dim").get<int>();
  c.skills = j.at("skills").get<int>();
  c.hidden_units = j.at("hidden_units").get<int>();
  c.hidden_layers = j.at("hidden_layers").get<int>();
  c.lr = j.at("lr").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.min_log_std = j.at("min_log_std").get<double>();
  c.max_log_std = j.at("max_log_std").get<double>();
  c.normalize_input = j.at("normalize_input").get<bool>();
  return c;
}

SkillDensityModel::SkillDensityModel(const SkillDensityConfig& config, Rng& rng)
    : config_(config),
      net_(config.skills,
           std::vector<Index>(static_cast<std::size_t>(config.hidden_layers),
                              config.hidden_units),
           2 * config.state_dim, rng, 0.01),
      norm_(config.state_dim),
      opt_(net_.parameters(), {config.lr, 0.9, 0.999, 1e-8}) {}

Matrix SkillDensityModel::heads() const {
  const Index d = config_.state_dim;
  Matrix out = net_.infer(Matrix::Identity(config_.skills, config_.skills));
  out.rightCols(d) = out.rightCols(d).cwiseMax(config_.min_log_std).cwiseMin(
      config_.max_log_std);
  return out;
}

dist::DiagGaussian SkillDensityModel::head(int z) const {
  if (z < 0 || z >= config_.skills) throw std::out_of_range("skill index out of range");
  const Index d = config_.state_dim;
  const Matrix h = heads();
  dist::DiagGaussian g{h.row(z).head(d).transpose(), h.row(z).tail(d).transpose()};
  if (config_.normalize_input && norm_.count() > 0) {
    const Eigen::VectorXd sd = (norm_.variance().array() + nn::RunningNormalizer::kEpsilon).sqrt();
    g.mean = norm_.denormalize(g.mean);
    g.log_std = g.log_std.array() + sd.array().log();
  }
  return g;
}

Matrix SkillDensityModel::log_probs(const Matrix& states) const {
  const Index d = config_.state_dim;
  const Matrix h = heads();
  const bool norm = config_.normalize_input && norm_.count() > 0;
  const Matrix x = norm ? norm_.normalize_rows(states) : states;
  // Jacobian of the standardization.
  const double log_jac =
      norm ? -0.5 * (norm_.variance().array() + nn::RunningNormalizer::kEpsilon).log().sum() : 0.0;
  Matrix out(states.rows(), config_.skills);
  for (int k = 0; k < config_.skills; ++k) {
    const Eigen::ArrayXd mu = h.row(k).head(d).transpose();
    const Eigen::ArrayXd ls = h.row(k).tail(d).transpose();
    const Eigen::ArrayXd inv = (-ls).exp();
    const double c = -ls.sum() - 0.5 * dist::kLog2Pi * static_cast<double>(d) + log_jac;
    for (Index i = 0; i < x.rows(); ++i) {
      const Eigen::ArrayXd z = (x.row(i).transpose().array() - mu) * inv;
      out(i, k) = -0.5 * z.square().sum() + c;
    }
  }
  return out;
}

double SkillDensityModel::loss(const Matrix& states, std::span<const int> labels) const {
  const Matrix lp = log_probs(states);
  double total = 0.0;
  for (Index i = 0; i < lp.rows(); ++i) total -= lp(i, labels[i]);
  return total / static_cast<double>(lp.rows());
}

Var SkillDensityModel::nll(const Matrix& states, std::span<const int> labels) const {
  const Index d = config_.state_dim;
  Matrix onehot = Matrix::Zero(states.rows(), config_.skills);
  for (Index i = 0; i < states.rows(); ++i) onehot(i, labels[i]) = 1.0;
  const Var out = net_.forward(Var::constant(onehot));
  const Var mean = nn::slice_cols(out, 0, d);
  const Var log_std =
      nn::clamp(nn::slice_cols(out, d, d), config_.min_log_std, config_.max_log_std);
  const Matrix x = config_.normalize_input ? norm_.normalize_rows(states) : states;
  return -nn::mean(dist::gaussian_log_prob(mean, log_std, x));
}

double SkillDensityModel::train_epoch(const Matrix& states, std::span<const int> labels,
                                      Rng& rng) {
  const Index n = states.rows();
  if (static_cast<Index>(labels.size()) != n) {
    throw nn::ShapeError("train_epoch: one label per state required");
  }
  for (int l : labels) {
    if (l < 0 || l >= config_.skills) throw std::out_of_range("skill label out of range");
  }
  if (config_.normalize_input) norm_.observe_rows(states);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  double total = 0.0;
  int batches = 0;
  for (Index start = 0; start < n; start += config_.batch_size) {
    const Index m = std::min<Index>(config_.batch_size, n - start);
    Matrix x(m, states.cols());
    std::vector<int> y(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) {
      const Index r = order[static_cast<std::size_t>(start + i)];
      x.row(i) = states.row(r);
      y[static_cast<std::size_t>(i)] = labels[r];
    }
    const Var l = nll(x, y);
    opt_.zero_grad();
    nn::backward(l);
    opt_.step();
    total += l.item();
    ++batches;
  }
  return batches ? total / batches : 0.0;
}

nn::NamedParams SkillDensityModel::named_parameters() const {
  nn::NamedParams out;
  net_.append_named(out, "density");
  return out;
}

}  // namespace skilllab::density
