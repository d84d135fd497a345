#include "skilllab/config.hpp"

#include <set>
#include <stdexcept>

namespace skilllab {

namespace {
void reject_unknown(const nlohmann::json& j, const nlohmann::json& reference,
                    const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!reference.contains(key)) {
      throw std::invalid_argument("unknown config key '" + where + key + "'");
    }
  }
}

// Defaults overlaid with the provided keys.
nlohmann::json overlay(const nlohmann::json& defaults, const nlohmann::json& j,
                       const std::string& where) {
  reject_unknown(j, defaults, where);
  nlohmann::json out = defaults;
  for (const auto& [key, value] : j.items()) out[key] = value;
  return out;
}

std::uint64_t name_hash(const char* s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (; *s; ++s) {
    h ^= static_cast<unsigned char>(*s);
    h *= 1099511628211ULL;
  }
  return h;
}
}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::kEdl: return "edl";
    case Method::kReverse: return "reverse";
    case Method::kForward: return "forward";
  }
  return "edl";
}

std::string to_string(ExploreMode m) {
  switch (m) {
    case ExploreMode::kOracle: return "oracle";
    case ExploreMode::kSmm: return "smm";
    case ExploreMode::kRestricted: return "restricted";
  }
  return "oracle";
}

Method parse_method(const std::string& s) {
  if (s == "edl") return Method::kEdl;
  if (s == "reverse") return Method::kReverse;
  if (s == "forward") return Method::kForward;
  throw std::invalid_argument("unknown method '" + s + "' (expected edl, reverse, forward)");
}

ExploreMode parse_explore(const std::string& s) {
  if (s == "oracle") return ExploreMode::kOracle;
  if (s == "smm") return ExploreMode::kSmm;
  if (s == "restricted") return ExploreMode::kRestricted;
  throw std::invalid_argument("unknown explore mode '" + s +
                              "' (expected oracle, smm, restricted)");
}

const std::vector<double>& RunConfig::epsilon_grid() {
  static const std::vector<double> grid{2.5, 5.0, 7.5};
  return grid;
}

void RunConfig::apply_paper_defaults() {
  ppo.entropy_coef = agents::PPOConfig::entropy_grid().front();
  ppo.lr = agents::PPOConfig::lr_grid().front();
  epsilon = epsilon_grid().front();
  vqvae.commitment = density::VqVaeConfig::commitment_grid().front();
  smm.alpha = explore::SmmConfig::alpha_grid().front();
  smm.vae_beta = explore::SmmConfig::vae_beta_grid().front();
  network.normalize_input = true;
}

void RunConfig::validate() const {
  if (skills < 1) throw std::invalid_argument("skills must be >= 1");
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (eval_rollouts < 1) throw std::invalid_argument("eval_rollouts must be >= 1");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (explore == ExploreMode::kRestricted && !region) {
    throw std::invalid_argument("restricted exploration requires a region");
  }
  if (region && !((*region)[2] > (*region)[0] && (*region)[3] > (*region)[1])) {
    throw std::invalid_argument("region must satisfy x0 < x1 and y0 < y1");
  }
  if (oracle_samples < vqvae.samples && method == Method::kEdl &&
      explore != ExploreMode::kSmm) {
    throw std::invalid_argument("oracle_samples must cover the VQ-VAE sample count");
  }
  ppo.validate();
  vqvae.validate();
  smm.validate();
}

nlohmann::json RunConfig::to_json() const {
  return {{"method", to_string(method)},
          {"maze", maze},
          {"explore", to_string(explore)},
          {"region", region ? nlohmann::json(*region) : nlohmann::json(nullptr)},
          {"skills", skills},
          {"seed", seed},
          {"sibling_rivalry", sibling_rivalry},
          {"epsilon", epsilon},
          {"out", out},
          {"iterations", iterations},
          {"eval_rollouts", eval_rollouts},
          {"random_rollouts", random_rollouts},
          {"eval_deterministic", eval_deterministic},
          {"oracle_samples", oracle_samples},
          {"landscape_resolution", landscape_resolution},
          {"ppo", ppo.to_json()},
          {"network", network.to_json()},
          {"vqvae", vqvae.to_json()},
          {"smm", smm.to_json()},
          {"discriminator", discriminator.to_json()},
          {"density", density.to_json()}};
}

RunConfig RunConfig::from_json(const nlohmann::json& in) {
  const RunConfig defaults;
  const nlohmann::json d = defaults.to_json();
  const nlohmann::json j = overlay(d, in, "");
  RunConfig c;
  c.method = parse_method(j.at("method").get<std::string>());
  c.maze = j.at("maze").get<std::string>();
  c.explore = parse_explore(j.at("explore").get<std::string>());
  if (!j.at("region").is_null()) c.region = j.at("region").get<std::array<double, 4>>();
  c.skills = j.at("skills").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.sibling_rivalry = j.at("sibling_rivalry").get<bool>();
  c.epsilon = j.at("epsilon").get<double>();
  c.out = j.at("out").get<std::string>();
  c.iterations = j.at("iterations").get<int>();
  c.eval_rollouts = j.at("eval_rollouts").get<int>();
  c.random_rollouts = j.at("random_rollouts").get<int>();
  c.eval_deterministic = j.at("eval_deterministic").get<bool>();
  c.oracle_samples = j.at("oracle_samples").get<int>();
  c.landscape_resolution = j.at("landscape_resolution").get<int>();
  c.ppo = agents::PPOConfig::from_json(overlay(d.at("ppo"), j.at("ppo"), "ppo."));
  c.network = agents::NetworkConfig::from_json(
      overlay(d.at("network"), j.at("network"), "network."));
  c.vqvae = density::VqVaeConfig::from_json(overlay(d.at("vqvae"), j.at("vqvae"), "vqvae."));
  c.smm = explore::SmmConfig::from_json(overlay(d.at("smm"), j.at("smm"), "smm."));
  c.discriminator = density::DiscriminatorConfig::from_json(
      overlay(d.at("discriminator"), j.at("discriminator"), "discriminator."));
  c.density = density::SkillDensityConfig::from_json(
      overlay(d.at("density"), j.at("density"), "density."));
  c.validate();
  return c;
}

const std::array<const char*, 4>& SeedStreams::names() {
  static const std::array<const char*, 4> n{"env", "policy", "model", "sampling"};
  return n;
}

nlohmann::json SeedStreams::to_json() const {
  nlohmann::json streams = nlohmann::json::array();
  for (const char* n : names()) streams.push_back(n);
  return {{"seed", seed}, {"scope", scope}, {"streams", streams}};
}

SeedStreams seed_everything(std::uint64_t seed, const std::string& scope) {
  SeedStreams s;
  s.seed = seed;
  s.scope = scope;
  nn::Rng* targets[4] = {&s.env, &s.policy, &s.model, &s.sampling};
  for (std::size_t i = 0; i < 4; ++i) {
    const std::uint64_t h =
        name_hash(SeedStreams::names()[i]) ^ (name_hash(scope.c_str()) * 31);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    targets[i]->seed(seq);
  }
  return s;
}

}  // namespace skilllab
