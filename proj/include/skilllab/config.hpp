#pragma once

// Run configuration and seeding.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "skilllab/agents/ppo.hpp"
#include "skilllab/density/discriminator.hpp"
#include "skilllab/density/skill_density.hpp"
#include "skilllab/density/vqvae.hpp"
#include "skilllab/exploration.hpp"

namespace skilllab {

enum class Method { kEdl, kReverse, kForward };
enum class ExploreMode { kOracle, kSmm, kRestricted };

std::string to_string(Method m);
std::string to_string(ExploreMode m);
Method parse_method(const std::string& s);
ExploreMode parse_explore(const std::string& s);

struct RunConfig {
  Method method = Method::kEdl;
  std::string maze = "square";
  ExploreMode explore = ExploreMode::kOracle;
  std::optional<std::array<double, 4>> region;  // x0, y0, x1, y1
  int skills = 10;
  std::uint64_t seed = 0;
  bool sibling_rivalry = false;
  double epsilon = 2.5;
  std::string out = "run";
  int iterations = 200;
  int eval_rollouts = 20;
  int random_rollouts = 100;
  bool eval_deterministic = false;
  int oracle_samples = 50000;
  int landscape_resolution = 50;

  agents::PPOConfig ppo;
  agents::NetworkConfig network;
  density::VqVaeConfig vqvae;
  explore::SmmConfig smm;
  density::DiscriminatorConfig discriminator;
  density::SkillDensityConfig density;

  static const std::vector<double>& epsilon_grid();
  // Pins every grid-searched value to the first element of its set.
  void apply_paper_defaults();
  void validate() const;
  nlohmann::json to_json() const;
  // Rejects unknown keys at every level.
  static RunConfig from_json(const nlohmann::json& j);
  bool operator==(const RunConfig& other) const { return to_json() == other.to_json(); }
};

// Four independent generators derived from one seed.
struct SeedStreams {
  std::uint64_t seed = 0;
  std::string scope;
  nn::Rng env;
  nn::Rng policy;
  nn::Rng model;
  nn::Rng sampling;

  static const std::array<const char*, 4>& names();
  nlohmann::json to_json() const;
};

// `scope` salts the derivation so separate stages get unrelated streams.
SeedStreams seed_everything(std::uint64_t seed, const std::string& scope = "");

}  // namespace skilllab
