#include "skilllab/density/discriminator.hpp"

#include <algorithm>
#include <numeric>

namespace skilllab::density {

nlohmann::json DiscriminatorConfig::to_json() const {
  return {{"state_dim", state_dim},     {"skills", skills},
          {"hidden_units", hidden_units}, {"hidden_layers", hidden_layers},
          {"lr", lr},                   {"batch_size", batch_size},
          {"normalize_input", normalize_input}};
}

DiscriminatorConfig DiscriminatorConfig::from_json(const nlohmann::json& j) {
  DiscriminatorConfig c;
  c.state_dim = j.at("state_dim").get<int>();
  c.skills = j.at("skills").get<int>();
  c.hidden_units = j.at("hidden_units").get<int>();
  c.hidden_layers = j.at("hidden_layers").get<int>();
  c.lr = j.at("lr").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.normalize_input = j.at("normalize_input").get<bool>();
  return c;
}

SkillDiscriminator::SkillDiscriminator(const DiscriminatorConfig& config, Rng& rng)
    : config_(config),
      net_(config.state_dim,
           std::vector<Index>(static_cast<std::size_t>(config.hidden_layers),
                              config.hidden_units),
           config.skills, rng, 0.01),
      norm_(config.state_dim),
      opt_(net_.parameters(), {config.lr, 0.9, 0.999, 1e-8}) {
  if (config.skills < 1) throw std::invalid_argument("discriminator needs >= 1 skill");
}

Matrix SkillDiscriminator::input(const Matrix& states) const {
  return config_.normalize_input ? norm_.normalize_rows(states) : states;
}

Var SkillDiscriminator::logits(const Matrix& states) const {
  return net_.forward(Var::constant(input(states)));
}

Matrix SkillDiscriminator::log_probs(const Matrix& states) const {
  const Matrix z = net_.infer(input(states));
  Matrix out(z.rows(), z.cols());
  for (Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    out.row(i) = z.row(i).array() - lse;
  }
  return out;
}

double SkillDiscriminator::loss(const Matrix& states, std::span<const int> labels) const {
  const Matrix lp = log_probs(states);
  double total = 0.0;
  for (Index i = 0; i < lp.rows(); ++i) total -= lp(i, labels[i]);
  return total / static_cast<double>(lp.rows());
}

double SkillDiscriminator::accuracy(const Matrix& states,
                                   std::span<const int> labels) const {
  const Matrix lp = log_probs(states);
  int hits = 0;
  for (Index i = 0; i < lp.rows(); ++i) {
    Index k;
    lp.row(i).maxCoeff(&k);
    hits += static_cast<int>(k) == labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(lp.rows());
}

double SkillDiscriminator::train_epoch(const Matrix& states, std::span<const int> labels,
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
    const Var nll = -nn::mean(nn::gather(nn::log_softmax(logits(x)), y));
    opt_.zero_grad();
    nn::backward(nll);
    opt_.step();
    total += nll.item();
    ++batches;
  }
  return batches ? total / batches : 0.0;
}

nn::NamedParams SkillDiscriminator::named_parameters() const {
  nn::NamedParams out;
  net_.append_named(out, "discriminator");
  return out;
}

}  // namespace skilllab::density
