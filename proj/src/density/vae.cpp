#include "skilllab/density/vae.hpp"

#include <cmath>

namespace skilllab::density {

namespace {
std::vector<Index> hidden(const VaeConfig& c) {
  return std::vector<Index>(static_cast<std::size_t>(c.hidden_layers), c.hidden_units);
}

Matrix standard_normal(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n01(rng);
  return m;
}
}  // namespace

const std::vector<double>& VaeConfig::beta_grid() {
  static const std::vector<double> grid{0.01, 0.1, 1.0};
  return grid;
}

nlohmann::json VaeConfig::to_json() const {
  return {{"state_dim", state_dim},
          {"latent_dim", latent_dim},
          {"hidden_units", hidden_units},
          {"hidden_layers", hidden_layers},
          {"beta", beta},
          {"lr", lr},
          {"batch_size", batch_size},
          {"importance_samples", importance_samples},
          {"min_log_std", min_log_std},
          {"max_log_std", max_log_std}};
}

VaeConfig VaeConfig::from_json(const nlohmann::json& j) {
  VaeConfig c;
  c.state_dim = j.at("state_dim").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.hidden_units = j.at("hidden_units").get<int>();
  c.hidden_layers = j.at("hidden_layers").get<int>();
  c.beta = j.at("beta").get<double>();
  c.lr = j.at("lr").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.importance_samples = j.at("importance_samples").get<int>();
  c.min_log_std = j.at("min_log_std").get<double>();
  c.max_log_std = j.at("max_log_std").get<double>();
  return c;
}

Var gaussian_kl_standard(const Var& mean, const Var& log_std) {
  // 0.5 * sum(mu^2 + sigma^2 - 1 - 2 log sigma)
  const Var per_dim = nn::square(mean) + nn::exp(nn::scale(log_std, 2.0)) -
                      nn::scale(log_std, 2.0) - 1.0;
  return nn::scale(nn::sum_rows(per_dim), 0.5);
}

Eigen::VectorXd gaussian_kl_standard(const Matrix& mean, const Matrix& log_std) {
  return 0.5 * (mean.array().square() + (2.0 * log_std.array()).exp() -
                2.0 * log_std.array() - 1.0)
                   .matrix()
                   .rowwise()
                   .sum();
}

GaussianVAE::GaussianVAE(const VaeConfig& config, Rng& rng)
    : config_(config),
      encoder_(config.state_dim, hidden(config), 2 * config.latent_dim, rng),
      decoder_(config.latent_dim, hidden(config), 2 * config.state_dim, rng) {
  opt_ = nn::Adam(parameters(), {config.lr, 0.9, 0.999, 1e-8});
}

std::vector<Var> GaussianVAE::parameters() const {
  std::vector<Var> p = encoder_.parameters();
  for (auto& v : decoder_.parameters()) p.push_back(v);
  return p;
}

nn::NamedParams GaussianVAE::named_parameters() const {
  nn::NamedParams out;
  encoder_.append_named(out, "vae.encoder");
  decoder_.append_named(out, "vae.decoder");
  return out;
}

void GaussianVAE::encode(const Matrix& states, Matrix& mean, Matrix& log_std) const {
  const Matrix out = encoder_.infer(states);
  const Index l = config_.latent_dim;
  mean = out.leftCols(l);
  log_std = out.rightCols(l).cwiseMax(config_.min_log_std).cwiseMin(config_.max_log_std);
}

void GaussianVAE::decode(const Matrix& z, Matrix& mean, Matrix& log_std) const {
  const Matrix out = decoder_.infer(z);
  const Index d = config_.state_dim;
  mean = out.leftCols(d);
  log_std = out.rightCols(d).cwiseMax(config_.min_log_std).cwiseMin(config_.max_log_std);
}

ElboParts GaussianVAE::build(const Matrix& batch, Rng& rng, Var* loss) const {
  const Index l = config_.latent_dim;
  const Index d = config_.state_dim;
  const Var enc = encoder_.forward(Var::constant(batch));
  const Var mu = nn::slice_cols(enc, 0, l);
  const Var ls =
      nn::clamp(nn::slice_cols(enc, l, l), config_.min_log_std, config_.max_log_std);
  const Var eps = Var::constant(standard_normal(batch.rows(), l, rng));
  const Var z = mu + nn::exp(ls) * eps;
  const Var dec = decoder_.forward(z);
  const Var rec = dist::gaussian_log_prob(
      nn::slice_cols(dec, 0, d),
      nn::clamp(nn::slice_cols(dec, d, d), config_.min_log_std, config_.max_log_std),
      batch);
  const Var kl = gaussian_kl_standard(mu, ls);
  const Var mean_rec = nn::mean(rec);
  const Var mean_kl = nn::mean(kl);
  const Var total = config_.beta * mean_kl - mean_rec;
  if (loss) *loss = total;
  return {mean_rec.item(), mean_kl.item(), total.item()};
}

ElboParts GaussianVAE::train_step(const Matrix& batch, Rng& rng) {
  Var loss;
  const ElboParts parts = build(batch, rng, &loss);
  opt_.zero_grad();
  nn::backward(loss);
  opt_.step();
  return parts;
}

ElboParts GaussianVAE::evaluate(const Matrix& batch, Rng& rng) const {
  return build(batch, rng, nullptr);
}

Eigen::VectorXd GaussianVAE::log_density(const Matrix& states, Rng& rng) const {
  const Index n = states.rows();
  const Index l = config_.latent_dim;
  const int k = std::max(1, config_.importance_samples);
  Matrix mu, ls;
  encode(states, mu, ls);
  // log w = log p(s|z) + log N(z; 0, I) - log q(z|s)
  Matrix log_w(n, k);
  const Matrix zero_ls = Matrix::Zero(1, l);
  for (int j = 0; j < k; ++j) {
    const Matrix eps = standard_normal(n, l, rng);
    const Matrix z = mu.array() + ls.array().exp() * eps.array();
    Matrix dm, dls;
    decode(z, dm, dls);
    const Eigen::VectorXd lp_x = dist::gaussian_log_prob_rows(dm, dls, states);
    const Eigen::VectorXd lp_z =
        dist::gaussian_log_prob_rows(Matrix::Zero(n, l), zero_ls, z);
    const Eigen::VectorXd lq = dist::gaussian_log_prob_rows(mu, ls, z);
    log_w.col(j) = lp_x + lp_z - lq;
  }
  Eigen::VectorXd out(n);
  for (Index i = 0; i < n; ++i) {
    const double m = log_w.row(i).maxCoeff();
    out[i] = m + std::log((log_w.row(i).array() - m).exp().mean());
  }
  return out;
}

Matrix GaussianVAE::sample(Index n, Rng& rng) const {
  const Matrix z = standard_normal(n, config_.latent_dim, rng);
  Matrix dm, dls;
  decode(z, dm, dls);
  return dm.array() + dls.array().exp() * standard_normal(n, config_.state_dim, rng).array();
}

}  // namespace skilllab::density
