#pragma once

// Explore -> Discover -> Learn, the two mutual-information baselines, and
// the evaluation utilities shared by the CLI and the acceptance suite.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "skilllab/config.hpp"
#include "skilllab/density/vqvae.hpp"
#include "skilllab/exploration.hpp"
#include "skilllab/rewards.hpp"

namespace skilllab::pipeline {

using nn::Index;
using nn::Matrix;
using nn::Rng;

struct IterationMetrics {
  int iteration = 0;
  long steps = 0;
  double reward_mean = 0;
  double reward_max = 0;
  double entropy = 0;
  double loss_policy = 0;
  double loss_value = 0;
  double clip_fraction = 0;
  double model_loss = 0;
  int episodes = 0;
  int admitted_episodes = 0;
  int skipped_minibatches = 0;
  std::uint64_t reward_checksum = 0;
  nlohmann::json to_json() const;
};
using MetricsSink = std::function<void(const IterationMetrics&)>;

struct LearnResult {
  agents::SkillConditionedPolicy policy;
  agents::ValueNet value;
  Matrix latents;  // conditioning vector per skill
  std::vector<IterationMetrics> metrics;
  double max_reward = -std::numeric_limits<double>::infinity();
  bool reward_frozen = true;
  // Baselines: the final discriminator or density checkpoint.
  nlohmann::json reward_model;
};

agents::NetworkConfig network_for(const RunConfig& config, const env::MazeSpec& spec,
                                  int latent_dim);

explore::StateBuffer run_explore(const env::MazeSpec& spec, const RunConfig& config,
                                 SeedStreams& streams);

struct DiscoverResult {
  density::VqVae model;
  density::VqLosses losses;
  std::vector<int> dead_codes;
  bool dead_code_warning = false;  // more than K/2 dead codes
};
// Consumes only the buffer. Throws if it holds fewer than vqvae.samples states.
DiscoverResult run_discover(const explore::StateBuffer& buffer, const RunConfig& config,
                            SeedStreams& streams);

// PPO against the frozen EDL reward, codes as conditioning vectors. With
// config.sibling_rivalry, episodes are collected in sibling pairs.
LearnResult run_learn(const density::VqVae& model, const env::MazeSpec& spec,
                      const RunConfig& config, SeedStreams& streams,
                      const MetricsSink& sink = {});

// Joint loop for the reverse or forward baseline with one-hot skills.
LearnResult run_baseline(const env::MazeSpec& spec, const RunConfig& config,
                         SeedStreams& streams, const MetricsSink& sink = {});

// argmax_s q(s|z_i): the decoder mean of every code, raw coordinates.
Matrix extract_goals(const density::VqVae& model);
// (1 - w) z_i + w z_j per weight.
Matrix interpolate_skills(const Matrix& codes, int i, int j, std::span<const double> weights);

// `per_latent` episodes for each latent row, without touching normalizers.
std::vector<env::Trajectory> rollout_latents(const agents::SkillConditionedPolicy& policy,
                                             const env::MazeSpec& spec, const Matrix& latents,
                                             std::span<const int> skill_ids, int per_latent,
                                             bool deterministic, Rng& rng);

// Fraction of cell x cell free-space cells visited by any state.
double coverage_metric(const std::vector<env::Trajectory>& trajectories,
                       const env::MazeSpec& spec, double cell = 0.5);

// Mean final state of each skill's trajectories, skills x 2.
Matrix mean_terminal_states(const std::vector<env::Trajectory>& trajectories, int skills);

// Minimum-cost perfect matching of a square cost matrix; result[i] is the
// column matched to row i. Exact (bitmask DP), n <= 16.
std::vector<int> optimal_assignment(const Matrix& cost);
Matrix pairwise_distances(const Matrix& a, const Matrix& b);

nlohmann::json trajectories_to_json(const std::vector<env::Trajectory>& trajectories);

struct EvalOptions {
  std::optional<std::pair<int, int>> interpolate;
  int steps = 5;
};

// Full run into config.out: config.json, manifest.json, buffer.json and
// codebook.json (EDL), model.json (baselines), policy.json, metrics.jsonl,
// and eval outputs. Returns the manifest.
nlohmann::json run_pipeline(const RunConfig& config, const MetricsSink& sink = {});

// Individual stages over an existing run directory.
void stage_explore(const RunConfig& config);
void stage_discover(const RunConfig& config);
void stage_learn(const RunConfig& config, const MetricsSink& sink = {});

// Evaluation from run artifacts alone: eval/trajectories.json,
// eval/random.json, eval/coverage.json, eval/landscape-<k>.json,
// eval/goals.json (EDL), eval/interpolation.json when requested.
nlohmann::json run_eval(const std::filesystem::path& dir, const EvalOptions& options = {});

}  // namespace skilllab::pipeline
