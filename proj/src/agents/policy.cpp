#include "skilllab/agents/policy.hpp"

namespace skilllab::agents {

namespace {
std::vector<Index> hidden_dims(const NetworkConfig& c) {
  return std::vector<Index>(static_cast<std::size_t>(c.hidden_layers), c.hidden_units);
}
}  // namespace

nlohmann::json NetworkConfig::to_json() const {
  return {{"state_dim", state_dim},       {"latent_dim", latent_dim},
          {"action_dim", action_dim},     {"hidden_units", hidden_units},
          {"hidden_layers", hidden_layers}, {"action_bound", action_bound},
          {"normalize_input", normalize_input}};
}

NetworkConfig NetworkConfig::from_json(const nlohmann::json& j) {
  NetworkConfig c;
  c.state_dim = j.at("state_dim").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.action_dim = j.at("action_dim").get<int>();
  c.hidden_units = j.at("hidden_units").get<int>();
  c.hidden_layers = j.at("hidden_layers").get<int>();
  c.action_bound = j.at("action_bound").get<double>();
  c.normalize_input = j.at("normalize_input").get<bool>();
  return c;
}

SkillConditionedPolicy::SkillConditionedPolicy(const NetworkConfig& config, Rng& rng)
    : config_(config),
      net_(config.state_dim + config.latent_dim, hidden_dims(config),
           2 * config.action_dim, rng, 0.01),
      normalizer_(config.state_dim) {}

Matrix SkillConditionedPolicy::make_input(const Matrix& states,
                                          const Matrix& latents) const {
  if (states.cols() != config_.state_dim || latents.cols() != config_.latent_dim ||
      states.rows() != latents.rows()) {
    throw nn::ShapeError("make_input: expected states x" +
                         std::to_string(config_.state_dim) + " and latents x" +
                         std::to_string(config_.latent_dim));
  }
  Matrix in(states.rows(), input_dim());
  in.leftCols(config_.state_dim) =
      config_.normalize_input ? normalizer_.normalize_rows(states) : states;
  if (config_.latent_dim > 0) in.rightCols(config_.latent_dim) = latents;
  return in;
}

SkillConditionedPolicy::Head SkillConditionedPolicy::forward(const Var& input) const {
  Var out = net_.forward(input);
  const Index d = config_.action_dim;
  return {nn::softplus(nn::slice_cols(out, 0, d)) + 1.0,
          nn::softplus(nn::slice_cols(out, d, d)) + 1.0};
}

void SkillConditionedPolicy::infer(const Matrix& input, Matrix& alpha,
                                   Matrix& beta) const {
  const Matrix out = net_.infer(input);
  const Index d = config_.action_dim;
  auto sp = [](double x) { return nn::softplus(x) + 1.0; };
  alpha = out.leftCols(d).unaryExpr(sp);
  beta = out.middleCols(d, d).unaryExpr(sp);
}

dist::ScaledBeta SkillConditionedPolicy::distribution(
    const Eigen::VectorXd& input_row) const {
  Matrix alpha, beta;
  infer(input_row.transpose(), alpha, beta);
  return dist::make_scaled_beta(alpha.row(0).transpose(), beta.row(0).transpose(),
                                low(), high());
}

nn::NamedParams SkillConditionedPolicy::named_parameters() const {
  nn::NamedParams out;
  net_.append_named(out, "policy");
  return out;
}

ValueNet::ValueNet(const NetworkConfig& config, Rng& rng)
    : net_(config.state_dim + config.latent_dim, hidden_dims(config), 1, rng) {}

Eigen::VectorXd ValueNet::infer(const Matrix& input) const {
  const Matrix out = net_.infer(input);
  return target_norm_.denormalize_rows(out).col(0);
}

nn::NamedParams ValueNet::named_parameters() const {
  nn::NamedParams out;
  net_.append_named(out, "value");
  return out;
}

nlohmann::json save_agent(const SkillConditionedPolicy& policy, const ValueNet& value) {
  nn::NamedParams all = policy.named_parameters();
  for (auto& p : value.named_parameters()) all.push_back(std::move(p));
  nlohmann::json j;
  j["network"] = policy.config().to_json();
  j["parameters"] = nn::save_checkpoint(all, {{"policy_input", &policy.normalizer()},
                                           {"value_target", &value.target_normalizer()}});
  return j;
}

void load_agent(const nlohmann::json& j, SkillConditionedPolicy& policy,
                ValueNet& value) {
  const NetworkConfig config = NetworkConfig::from_json(j.at("network"));
  Rng scratch(0);
  policy = SkillConditionedPolicy(config, scratch);
  value = ValueNet(config, scratch);
  nn::NamedParams all = policy.named_parameters();
  for (auto& p : value.named_parameters()) all.push_back(std::move(p));
  nn::load_checkpoint(j.at("parameters"), all, {{"policy_input", &policy.normalizer()},
                     {"value_target", &value.target_normalizer()}});
}

}  // namespace skilllab::agents
