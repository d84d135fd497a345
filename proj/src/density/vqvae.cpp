#include "skilllab/density/vqvae.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace skilllab::density {

namespace {
std::vector<Index> hidden(const VqVaeConfig& c) {
  return std::vector<Index>(static_cast<std::size_t>(c.hidden_layers), c.hidden_units);
}
}  // namespace

const std::vector<double>& VqVaeConfig::commitment_grid() {
  static const std::vector<double> grid{0.25, 0.5, 0.75, 1.0, 1.25};
  return grid;
}

void VqVaeConfig::validate() const {
  if (codes < 1 || code_dim < 1 || state_dim < 1) {
    throw std::invalid_argument("VQ-VAE needs at least one code of positive size");
  }
  if (batch_size < 1 || samples < 1 || train_steps < 0) {
    throw std::invalid_argument("VQ-VAE batch, samples and steps must be positive");
  }
  if (!(commitment >= 0)) throw std::invalid_argument("commitment must be >= 0");
  if (!(lr > 0) || !(codebook_lr_scale > 0)) {
    throw std::invalid_argument("VQ-VAE learning rates must be positive");
  }
}

nlohmann::json VqVaeConfig::to_json() const {
  return {{"state_dim", state_dim},     {"codes", codes},
          {"code_dim", code_dim},       {"hidden_units", hidden_units},
          {"hidden_layers", hidden_layers}, {"commitment", commitment},
          {"lr", lr},                   {"codebook_lr_scale", codebook_lr_scale},
          {"batch_size", batch_size},
          {"samples", samples},         {"train_steps", train_steps},
          {"learn_sigma", learn_sigma}, {"normalize_input", normalize_input}};
}

VqVaeConfig VqVaeConfig::from_json(const nlohmann::json& j) {
  VqVaeConfig c;
  c.state_dim = j.at("state_dim").get<int>();
  c.codes = j.at("codes").get<int>();
  c.code_dim = j.at("code_dim").get<int>();
  c.hidden_units = j.at("hidden_units").get<int>();
  c.hidden_layers = j.at("hidden_layers").get<int>();
  c.commitment = j.at("commitment").get<double>();
  c.lr = j.at("lr").get<double>();
  c.codebook_lr_scale = j.at("codebook_lr_scale").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.samples = j.at("samples").get<int>();
  c.train_steps = j.at("train_steps").get<int>();
  c.learn_sigma = j.at("learn_sigma").get<bool>();
  c.normalize_input = j.at("normalize_input").get<bool>();
  c.validate();
  return c;
}

std::vector<int> nearest_code(const Matrix& codebook, const Matrix& z_e) {
  if (codebook.cols() != z_e.cols()) throw nn::ShapeError("nearest_code: code size mismatch");
  std::vector<int> out(static_cast<std::size_t>(z_e.rows()));
  for (Index i = 0; i < z_e.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Index k = 0; k < codebook.rows(); ++k) {
      const double d = (z_e.row(i) - codebook.row(k)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(k);
      }
    }
    out[static_cast<std::size_t>(i)] = arg;
  }
  return out;
}

Matrix one_hot_posterior(const Matrix& codebook, const Matrix& z_e) {
  const auto idx = nearest_code(codebook, z_e);
  Matrix out = Matrix::Zero(z_e.rows(), codebook.rows());
  for (Index i = 0; i < z_e.rows(); ++i) out(i, idx[static_cast<std::size_t>(i)]) = 1.0;
  return out;
}

VqVae::VqVae(const VqVaeConfig& config, Rng& rng)
    : config_(config),
      encoder_(config.state_dim, hidden(config), config.code_dim, rng),
      decoder_(config.code_dim, hidden(config),
               (config.learn_sigma ? 2 : 1) * config.state_dim, rng),
      norm_(config.state_dim) {
  config_.validate();
  std::uniform_real_distribution<double> u(-1.0 / config.codes, 1.0 / config.codes);
  Matrix e(config.codes, config.code_dim);
  for (Index i = 0; i < e.size(); ++i) e.data()[i] = u(rng);
  codebook_ = Var::parameter(e);
  reset_optimizers();
}

void VqVae::reset_optimizers() {
  std::vector<Var> nets = encoder_.parameters();
  for (auto& v : decoder_.parameters()) nets.push_back(v);
  opt_ = nn::Adam(std::move(nets), {config_.lr, 0.9, 0.999, 1e-8});
  code_opt_ = nn::Adam({codebook_},
                       {config_.lr * config_.codebook_lr_scale, 0.9, 0.999, 1e-8});
}

std::vector<Var> VqVae::parameters() const {
  std::vector<Var> p = encoder_.parameters();
  for (auto& v : decoder_.parameters()) p.push_back(v);
  p.push_back(codebook_);
  return p;
}

nn::NamedParams VqVae::named_parameters() const {
  nn::NamedParams out;
  encoder_.append_named(out, "vqvae.encoder");
  decoder_.append_named(out, "vqvae.decoder");
  out.emplace_back("vqvae.codebook", codebook_);
  return out;
}

std::uint64_t VqVae::checksum() const { return nn::parameter_checksum(parameters()); }

void VqVae::fit_normalizer(const Matrix& states) {
  norm_ = nn::RunningNormalizer(config_.state_dim);
  if (config_.normalize_input) norm_.observe_rows(states);
}

Matrix VqVae::normalized(const Matrix& states) const {
  if (states.cols() != config_.state_dim) throw nn::ShapeError("VQ-VAE: state size mismatch");
  return config_.normalize_input ? norm_.normalize_rows(states) : states;
}

Matrix VqVae::encode(const Matrix& states) const { return encoder_.infer(normalized(states)); }

std::vector<int> VqVae::assign(const Matrix& states) const {
  return nearest_code(codebook_.value(), encode(states));
}

Matrix VqVae::posterior(const Matrix& states) const {
  return one_hot_posterior(codebook_.value(), encode(states));
}

void VqVae::init_codebook(const Matrix& states, Rng& rng) {
  // k-means++ seeding over encoder outputs
  const Matrix z = encode(states);
  const Index n = z.rows();
  if (n < config_.codes) throw std::invalid_argument("init_codebook: fewer states than codes");
  Matrix e(config_.codes, config_.code_dim);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  e.row(0) = z.row(pick(rng));
  Eigen::VectorXd d2(n);
  for (Index i = 0; i < n; ++i) d2[i] = (z.row(i) - e.row(0)).squaredNorm();
  for (int k = 1; k < config_.codes; ++k) {
    const double total = d2.sum();
    Index chosen = 0;
    if (total > 0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (chosen = 0; chosen < n - 1; ++chosen) {
        r -= d2[chosen];
        if (r <= 0) break;
      }
    } else {
      chosen = pick(rng);
    }
    e.row(k) = z.row(chosen);
    for (Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (z.row(i) - e.row(k)).squaredNorm());
    }
  }
  codebook_.mutable_value() = e;
  reset_optimizers();
}

VqGraph VqVae::build_loss(const Matrix& states, double commitment) const {
  const Matrix x = normalized(states);
  const Index d = config_.state_dim;
  VqGraph g;
  g.z_e = encoder_.forward(Var::constant(x));
  const auto idx = nearest_code(codebook_.value(), g.z_e.value());
  const Var e_k = nn::gather_rows(codebook_, idx);
  // straight-through: forward value e_k, gradient copied to z_e
  g.z_q = g.z_e + Var::constant(e_k.value() - g.z_e.value());
  const Var out = decoder_.forward(g.z_q);
  Var log_std = Var::constant(Matrix::Zero(1, d));
  if (config_.learn_sigma) log_std = nn::clamp(nn::slice_cols(out, d, d), -5.0, 2.0);
  const Var rec = -nn::mean(dist::gaussian_log_prob(nn::slice_cols(out, 0, d), log_std, x));
  const Var cb = nn::mean(nn::sum_rows(nn::square(g.z_e.detach() - e_k)));
  const Var cm = nn::mean(nn::sum_rows(nn::square(g.z_e - e_k.detach())));
  g.total = rec + cb;
  if (commitment != 0.0) g.total = g.total + commitment * cm;
  g.losses = {rec.item(), cb.item(), cm.item(), g.total.item()};
  return g;
}

VqLosses VqVae::train_step(const Matrix& states) {
  const VqGraph g = build_loss(states, config_.commitment);
  opt_.zero_grad();
  code_opt_.zero_grad();
  nn::backward(g.total);
  opt_.step();
  code_opt_.step();
  return g.losses;
}

VqLosses VqVae::evaluate(const Matrix& states) const {
  return build_loss(states, config_.commitment).losses;
}

Matrix VqVae::decoder_out(const Matrix& latents) const { return decoder_.infer(latents); }

dist::DiagGaussian VqVae::decoder_head(int k) const {
  if (k < 0 || k >= config_.codes) throw std::out_of_range("code index out of range");
  const Index d = config_.state_dim;
  const Matrix out = decoder_out(codebook_.value().row(k));
  Eigen::VectorXd mean = out.row(0).head(d).transpose();
  Eigen::VectorXd log_std = config_.learn_sigma
                                ? Eigen::VectorXd(out.row(0).tail(d).transpose().cwiseMax(-5.0).cwiseMin(2.0))
                                : Eigen::VectorXd::Zero(d);
  if (config_.normalize_input && norm_.count() > 0) {
    mean = norm_.denormalize(mean);
    log_std.array() +=
        0.5 * (norm_.variance().array() + nn::RunningNormalizer::kEpsilon).log();
  }
  return {mean, log_std};
}

Eigen::VectorXd VqVae::decode_latent(const Eigen::VectorXd& latent) const {
  if (latent.size() != config_.code_dim) throw nn::ShapeError("decode_latent: code size mismatch");
  const Matrix out = decoder_out(latent.transpose());
  const Eigen::VectorXd mean = out.row(0).head(config_.state_dim).transpose();
  return config_.normalize_input && norm_.count() > 0 ? norm_.denormalize(mean) : mean;
}

Matrix VqVae::decoder_means() const {
  Matrix out(config_.codes, config_.state_dim);
  for (int k = 0; k < config_.codes; ++k) out.row(k) = decoder_head(k).mean.transpose();
  return out;
}

std::vector<int> VqVae::dead_codes(const Matrix& states) const {
  std::vector<int> counts(static_cast<std::size_t>(config_.codes), 0);
  for (int k : assign(states)) ++counts[static_cast<std::size_t>(k)];
  std::vector<int> dead;
  for (int k = 0; k < config_.codes; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0) dead.push_back(k);
  }
  return dead;
}

nlohmann::json VqVae::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  const Matrix e = codebook_.value();
  for (Index k = 0; k < e.rows(); ++k) {
    rows.push_back(std::vector<double>(e.row(k).data(), e.row(k).data() + e.cols()));
  }
  return {{"K", config_.codes},
          {"D", config_.code_dim},
          {"rows", rows},
          {"model",
           {{"config", config_.to_json()},
            {"parameters", nn::save_checkpoint(named_parameters(), {{"input", &norm_}})}}}};
}

VqVae VqVae::from_json(const nlohmann::json& j) {
  const VqVaeConfig config = VqVaeConfig::from_json(j.at("model").at("config"));
  Rng scratch(0);
  VqVae m(config, scratch);
  nn::load_checkpoint(j.at("model").at("parameters"), m.named_parameters(),
                      {{"input", &m.norm_}});
  if (j.at("K").get<int>() != config.codes || j.at("D").get<int>() != config.code_dim) {
    throw std::invalid_argument("codebook header disagrees with model config");
  }
  m.reset_optimizers();
  return m;
}

VqLosses train_vqvae(VqVae& model, const Matrix& states, Rng& rng) {
  const auto& c = model.config();
  if (states.rows() == 0) throw std::invalid_argument("train_vqvae: no states");
  std::uniform_int_distribution<Index> pick(0, states.rows() - 1);
  Matrix sample(c.samples, states.cols());
  for (Index i = 0; i < sample.rows(); ++i) sample.row(i) = states.row(pick(rng));
  model.fit_normalizer(sample);
  model.init_codebook(sample, rng);

  std::vector<Index> order(static_cast<std::size_t>(sample.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  const Index b = std::min<Index>(c.batch_size, sample.rows());
  Matrix batch(b, states.cols());
  for (int step = 0; step < c.train_steps; ++step) {
    for (Index i = 0; i < b; ++i) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.row(i) = sample.row(order[cursor++]);
    }
    model.train_step(batch);
  }
  return model.evaluate(sample);
}

}  // namespace skilllab::density
