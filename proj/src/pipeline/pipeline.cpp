#include "skilllab/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skilllab/pipeline/artifacts.hpp"
#include "skilllab/pipeline/sibling_rivalry.hpp"

namespace skilllab::pipeline {

nlohmann::json IterationMetrics::to_json() const {
  return {{"iteration", iteration},
          {"steps", steps},
          {"reward_mean", reward_mean},
          {"reward_max", reward_max},
          {"entropy", entropy},
          {"loss_policy", loss_policy},
          {"loss_value", loss_value},
          {"clip_fraction", clip_fraction},
          {"model_loss", model_loss},
          {"episodes", episodes},
          {"admitted_episodes", admitted_episodes},
          {"skipped_minibatches", skipped_minibatches},
          {"reward_checksum", reward_checksum}};
}

agents::NetworkConfig network_for(const RunConfig& config, const env::MazeSpec& spec,
                                  int latent_dim) {
  agents::NetworkConfig n = config.network;
  n.state_dim = 2;
  n.action_dim = 2;
  n.latent_dim = latent_dim;
  n.action_bound = spec.action_bound;
  return n;
}

explore::StateBuffer run_explore(const env::MazeSpec& spec, const RunConfig& config,
                                 SeedStreams& streams) {
  switch (config.explore) {
    case ExploreMode::kOracle:
    case ExploreMode::kRestricted: {
      std::optional<env::Box> region;
      if (config.explore == ExploreMode::kRestricted) {
        const auto& r = config.region.value();
        region = env::Box{r[0], r[1], r[2], r[3]};
      }
      const Matrix s = explore::oracle_sample(spec, config.oracle_samples, streams.sampling, region);
      explore::StateBuffer b(config.oracle_samples, 2);
      b.push_rows(s);
      return b;
    }
    case ExploreMode::kSmm:
      return explore::smm_train(spec, config.smm, streams.policy).buffer;
  }
  throw std::logic_error("unhandled explore mode");
}

DiscoverResult run_discover(const explore::StateBuffer& buffer, const RunConfig& config,
                            SeedStreams& streams) {
  density::VqVaeConfig vc = config.vqvae;
  vc.codes = config.skills;
  vc.state_dim = 2;
  if (buffer.size() < vc.samples) {
    throw std::invalid_argument("discover needs at least " + std::to_string(vc.samples) +
                                " buffered states, got " + std::to_string(buffer.size()));
  }
  DiscoverResult r{density::VqVae(vc, streams.model), {}, {}, false};
  const Matrix states = buffer.contents();
  r.losses = density::train_vqvae(r.model, states, streams.sampling);
  r.dead_codes = r.model.dead_codes(states);
  r.dead_code_warning = static_cast<int>(r.dead_codes.size()) * 2 > vc.codes;
  return r;
}

namespace {

struct LoopSpec {
  agents::SkillSet skills;
  const rewards::RewardEngine* engine = nullptr;
  // Refits the reward model on a fresh buffer; returns its loss.
  std::function<double(const agents::RolloutBuffer&)> fit;
  // Goals for sibling rivalry; empty disables it.
  Matrix goals;
};

LearnResult train_loop(const env::MazeSpec& spec, const RunConfig& config,
                       SeedStreams& streams, const LoopSpec& loop, const MetricsSink& sink) {
  const int latent_dim = static_cast<int>(loop.skills.latents.cols());
  const agents::NetworkConfig net = network_for(config, spec, latent_dim);
  LearnResult out{agents::SkillConditionedPolicy(net, streams.model),
                  agents::ValueNet(net, streams.model),
                  loop.skills.latents,
                  {},
                  -std::numeric_limits<double>::infinity(),
                  true,
                  nullptr};
  agents::PPOTrainer trainer(out.policy, out.value, config.ppo);
  const agents::MazeEnvironment environment(spec);
  agents::CollectOptions opts;
  opts.n_steps = config.ppo.horizon;
  opts.paired_episodes = loop.goals.rows() > 0;
  opts.reset_rng = &streams.env;

  const std::uint64_t first_checksum = loop.engine->checksum();
  long steps = 0;
  for (int it = 0; it < config.iterations; ++it) {
    agents::RolloutBuffer buf = agents::collect_rollouts(out.policy, &out.value, environment,
                                                         loop.skills, opts, streams.policy);
    steps += static_cast<long>(buf.size());
    IterationMetrics m;
    m.iteration = it;
    m.steps = steps;
    m.episodes = buf.episodes();
    if (loop.fit) m.model_loss = loop.fit(buf);
    const Eigen::VectorXd r = loop.engine->rewards(buf.next_states, buf.skills);
    buf.rewards += r;
    m.reward_mean = r.mean();
    m.reward_max = r.maxCoeff();
    out.max_reward = std::max(out.max_reward, m.reward_max);
    m.reward_checksum = loop.engine->checksum();
    if (!loop.fit && m.reward_checksum != first_checksum) out.reward_frozen = false;
    if (opts.paired_episodes) {
      const auto admitted = apply_sibling_rivalry(buf, loop.goals, config.epsilon);
      buf = buf.select_episodes(admitted);
    }
    m.admitted_episodes = buf.episodes();
    agents::compute_buffer_advantages(buf, config.ppo.gamma, config.ppo.gae_lambda);
    const agents::PPOMetrics pm = trainer.update(buf, streams.policy);
    m.entropy = pm.entropy;
    m.loss_policy = pm.policy_loss;
    m.loss_value = pm.value_loss;
    m.clip_fraction = pm.clip_fraction;
    m.skipped_minibatches = pm.skipped_minibatches;
    out.metrics.push_back(m);
    if (sink) sink(m);
  }
  return out;
}

}  // namespace

LearnResult run_learn(const density::VqVae& model, const env::MazeSpec& spec,
                      const RunConfig& config, SeedStreams& streams, const MetricsSink& sink) {
  const rewards::EdlReward engine(model);
  LoopSpec loop;
  loop.skills = agents::SkillSet::from_codes(model.codebook());
  loop.engine = &engine;
  if (config.sibling_rivalry) loop.goals = engine.goals();
  const std::uint64_t before = model.checksum();
  LearnResult r = train_loop(spec, config, streams, loop, sink);
  if (model.checksum() != before) r.reward_frozen = false;
  return r;
}

LearnResult run_baseline(const env::MazeSpec& spec, const RunConfig& config,
                         SeedStreams& streams, const MetricsSink& sink) {
  LoopSpec loop;
  loop.skills = agents::SkillSet::one_hot(config.skills);
  if (config.method == Method::kReverse) {
    density::DiscriminatorConfig dc = config.discriminator;
    dc.skills = config.skills;
    density::SkillDiscriminator model(dc, streams.model);
    const rewards::ReverseMIReward engine(model, loop.skills.prior);
    loop.engine = &engine;
    loop.fit = [&](const agents::RolloutBuffer& b) {
      return model.train_epoch(b.next_states, b.skills, streams.model);
    };
    LearnResult r = train_loop(spec, config, streams, loop, sink);
    r.reward_model = {{"kind", "reverse"},
                      {"config", dc.to_json()},
                      {"parameters", nn::save_checkpoint(model.named_parameters(),
                                                         {{"input", &model.normalizer()}})}};
    return r;
  }
  if (config.method == Method::kForward) {
    density::SkillDensityConfig dc = config.density;
    dc.skills = config.skills;
    density::SkillDensityModel model(dc, streams.model);
    const rewards::ForwardMIReward engine(model);
    loop.engine = &engine;
    loop.fit = [&](const agents::RolloutBuffer& b) {
      return model.train_epoch(b.next_states, b.skills, streams.model);
    };
    LearnResult r = train_loop(spec, config, streams, loop, sink);
    r.reward_model = {{"kind", "forward"},
                      {"config", dc.to_json()},
                      {"parameters", nn::save_checkpoint(model.named_parameters(),
                                                         {{"input", &model.normalizer()}})}};
    return r;
  }
  throw std::invalid_argument("run_baseline: method must be reverse or forward");
}

Matrix extract_goals(const density::VqVae& model) { return model.decoder_means(); }

Matrix interpolate_skills(const Matrix& codes, int i, int j, std::span<const double> weights) {
  if (i == j) throw std::invalid_argument("interpolate_skills: i and j must differ");
  if (i < 0 || j < 0 || i >= codes.rows() || j >= codes.rows()) {
    throw std::out_of_range("interpolate_skills: code index out of range");
  }
  Matrix out(static_cast<Index>(weights.size()), codes.cols());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double w = weights[k];
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("weights must lie in [0, 1]");
    if (w == 0.0) {
      out.row(static_cast<Index>(k)) = codes.row(i);
    } else if (w == 1.0) {
      out.row(static_cast<Index>(k)) = codes.row(j);
    } else {
      out.row(static_cast<Index>(k)) = (1.0 - w) * codes.row(i) + w * codes.row(j);
    }
  }
  return out;
}

std::vector<env::Trajectory> rollout_latents(const agents::SkillConditionedPolicy& policy,
                                             const env::MazeSpec& spec, const Matrix& latents,
                                             std::span<const int> skill_ids, int per_latent,
                                             bool deterministic, Rng& rng) {
  if (static_cast<Index>(skill_ids.size()) != latents.rows()) {
    throw nn::ShapeError("rollout_latents: one id per latent row required");
  }
  agents::SkillConditionedPolicy frozen = policy;
  const agents::MazeEnvironment environment(spec);
  Matrix all(latents.rows() * per_latent, latents.cols());
  std::vector<int> ids;
  for (Index k = 0; k < latents.rows(); ++k) {
    for (int r = 0; r < per_latent; ++r) {
      all.row(k * per_latent + r) = latents.row(k);
      ids.push_back(skill_ids[k]);
    }
  }
  agents::CollectOptions opts;
  opts.update_normalizer = false;
  opts.deterministic = deterministic;
  const auto buf = agents::collect_episodes(frozen, nullptr, environment, all, ids, opts, rng);
  return buf.trajectories();
}

double coverage_metric(const std::vector<env::Trajectory>& trajectories,
                       const env::MazeSpec& spec, double cell) {
  if (trajectories.empty()) throw std::invalid_argument("coverage_metric: no trajectories");
  const int nx = static_cast<int>(std::ceil(spec.width / cell - 1e-9));
  const int ny = static_cast<int>(std::ceil(spec.height / cell - 1e-9));
  std::vector<char> seen(static_cast<std::size_t>(nx) * ny, 0);
  auto mark = [&](const env::Vec2& p) {
    const int cx = std::clamp(static_cast<int>(p.x() / cell), 0, nx - 1);
    const int cy = std::clamp(static_cast<int>(p.y() / cell), 0, ny - 1);
    seen[static_cast<std::size_t>(cy) * nx + cx] = 1;
  };
  for (const auto& t : trajectories) {
    for (const auto& s : t.steps) {
      mark(s.state);
      mark(s.next_state);
    }
  }
  return static_cast<double>(std::count(seen.begin(), seen.end(), 1)) /
         static_cast<double>(seen.size());
}

Matrix mean_terminal_states(const std::vector<env::Trajectory>& trajectories, int skills) {
  Matrix sum = Matrix::Zero(skills, 2);
  std::vector<int> count(static_cast<std::size_t>(skills), 0);
  for (const auto& t : trajectories) {
    if (t.skill < 0 || t.skill >= skills) throw std::out_of_range("trajectory skill out of range");
    sum.row(t.skill) += t.final_state().transpose();
    ++count[static_cast<std::size_t>(t.skill)];
  }
  for (int k = 0; k < skills; ++k) {
    if (count[static_cast<std::size_t>(k)] == 0) {
      throw std::invalid_argument("mean_terminal_states: skill without trajectories");
    }
    sum.row(k) /= count[static_cast<std::size_t>(k)];
  }
  return sum;
}

std::vector<int> optimal_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw nn::ShapeError("optimal_assignment: cost must be square");
  if (n > 16) throw std::invalid_argument("optimal_assignment: at most 16 rows");
  const std::size_t full = std::size_t{1} << n;
  std::vector<double> dp(full, std::numeric_limits<double>::infinity());
  std::vector<int> choice(full, -1);
  dp[0] = 0.0;
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (!std::isfinite(dp[mask])) continue;
    const int row = __builtin_popcountll(mask);
    if (row == n) continue;
    for (int c = 0; c < n; ++c) {
      if (mask & (std::size_t{1} << c)) continue;
      const std::size_t next = mask | (std::size_t{1} << c);
      const double v = dp[mask] + cost(row, c);
      if (v < dp[next]) {
        dp[next] = v;
        choice[next] = c;
      }
    }
  }
  std::vector<int> out(static_cast<std::size_t>(n));
  std::size_t mask = full - 1;
  for (int row = n - 1; row >= 0; --row) {
    const int c = choice[mask];
    out[static_cast<std::size_t>(row)] = c;
    mask &= ~(std::size_t{1} << c);
  }
  return out;
}

Matrix pairwise_distances(const Matrix& a, const Matrix& b) {
  Matrix d(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).norm();
  }
  return d;
}

nlohmann::json trajectories_to_json(const std::vector<env::Trajectory>& trajectories) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : trajectories) {
    nlohmann::json states = nlohmann::json::array();
    if (!t.steps.empty()) states.push_back({t.steps.front().state.x(), t.steps.front().state.y()});
    for (const auto& s : t.steps) states.push_back({s.next_state.x(), s.next_state.y()});
    arr.push_back({{"skill", t.skill},
                   {"latent", std::vector<double>(t.latent.data(), t.latent.data() + t.latent.size())},
                   {"states", states}});
  }
  return arr;
}

// ---- run directories --------------------------------------------------------

namespace {

nlohmann::json deviations(const RunConfig& c) {
  nlohmann::json d = nlohmann::json::array();
  if (c.method == Method::kEdl && c.explore == ExploreMode::kSmm) {
    d.push_back("SMM mixture optimized with PPO instead of SAC");
  }
  if (c.method == Method::kEdl && c.sibling_rivalry) {
    d.push_back("sibling rivalry: farther sibling always admitted, closer one if within "
                "epsilon; terminal bonus min(||s_T - s'_T||, epsilon)");
  }
  return d;
}

RunDirectory open_run(const RunConfig& config) {
  RunDirectory dir(config.out);
  if (dir.has("config.json")) {
    // Later stages may change learn and eval settings, but nothing the
    // explore or discover artifacts were built from.
    const nlohmann::json stored = dir.read("config.json");
    const nlohmann::json now = config.to_json();
    for (const char* key : {"method", "maze", "explore", "region", "skills", "seed",
                            "oracle_samples", "vqvae", "smm"}) {
      if (stored.value(key, nlohmann::json()) != now.value(key, nlohmann::json())) {
        throw std::runtime_error("run directory " + config.out +
                                 " holds a config with a different " + key);
      }
    }
  }
  dir.write("config.json", config.to_json());
  auto& m = dir.manifest();
  m["method"] = to_string(config.method);
  m["maze"] = config.maze;
  m["seed"] = config.seed;
  m["hyperparameters"] = config.to_json();
  m["deviations"] = deviations(config);
  dir.save_manifest();
  return dir;
}

nlohmann::json policy_artifact(const LearnResult& r) {
  return {{"agent", agents::save_agent(r.policy, r.value)},
          {"latents", nn::matrix_to_json(r.latents)},
          {"reward_frozen", r.reward_frozen},
          {"max_reward", r.max_reward}};
}

void write_learn(RunDirectory& dir, const LearnResult& r) {
  dir.truncate("metrics.jsonl");
  for (const auto& m : r.metrics) dir.append_line("metrics.jsonl", m.to_json());
  dir.manifest()["artifacts"]["metrics.jsonl"] = file_hash(dir.path("metrics.jsonl"));
  dir.write("policy.json", policy_artifact(r));
}

}  // namespace

void stage_explore(const RunConfig& config) {
  if (config.method != Method::kEdl) throw std::invalid_argument("explore is an EDL stage");
  RunDirectory dir = open_run(config);
  const env::MazeSpec spec = env::resolve_maze(config.maze);
  SeedStreams streams = seed_everything(config.seed, "explore");
  const explore::StateBuffer buffer = run_explore(spec, config, streams);
  dir.write("buffer.json", buffer.to_json());
  dir.manifest()["explore"] = {{"maze", spec.name},
                               {"steps", buffer.size()},
                               {"seed", config.seed},
                               {"method", to_string(config.explore)},
                               {"streams", streams.to_json()}};
  dir.save_manifest();
}

void stage_discover(const RunConfig& config) {
  RunDirectory dir = open_run(config);
  const explore::StateBuffer buffer = explore::StateBuffer::from_json(dir.read("buffer.json"));
  SeedStreams streams = seed_everything(config.seed, "discover");
  DiscoverResult r = run_discover(buffer, config, streams);
  dir.write("codebook.json", r.model.to_json());
  dir.manifest()["discover"] = {{"inputs", {"buffer.json"}},
                                {"dead_codes", r.dead_codes},
                                {"dead_code_warning", r.dead_code_warning},
                                {"reconstruction", r.losses.reconstruction},
                                {"commitment", r.losses.commitment},
                                {"streams", streams.to_json()}};
  dir.save_manifest();
}

void stage_learn(const RunConfig& config, const MetricsSink& sink) {
  RunDirectory dir = open_run(config);
  const env::MazeSpec spec = env::resolve_maze(config.maze);
  SeedStreams streams = seed_everything(config.seed, "learn");
  LearnResult r;
  if (config.method == Method::kEdl) {
    const density::VqVae model = density::VqVae::from_json(dir.read("codebook.json"));
    r = run_learn(model, spec, config, streams, sink);
    dir.manifest()["learn"] = {{"inputs", {"codebook.json"}},
                               {"reward_checksum", model.checksum()},
                               {"reward_frozen", r.reward_frozen}};
  } else {
    r = run_baseline(spec, config, streams, sink);
    dir.write("model.json", r.reward_model);
    dir.manifest()["learn"] = {{"inputs", nlohmann::json::array()},
                               {"max_reward", r.max_reward}};
  }
  dir.manifest()["learn"]["streams"] = streams.to_json();
  write_learn(dir, r);
}

nlohmann::json run_pipeline(const RunConfig& config, const MetricsSink& sink) {
  config.validate();
  if (config.method == Method::kEdl) {
    stage_explore(config);
    stage_discover(config);
  }
  stage_learn(config, sink);
  run_eval(config.out);
  return RunDirectory(config.out).manifest();
}

nlohmann::json run_eval(const std::filesystem::path& root, const EvalOptions& options) {
  RunDirectory dir(root);
  const RunConfig config = RunConfig::from_json(dir.read("config.json"));
  const env::MazeSpec spec = env::resolve_maze(config.maze);
  const nlohmann::json pj = dir.read("policy.json");
  agents::SkillConditionedPolicy policy;
  agents::ValueNet value;
  agents::load_agent(pj.at("agent"), policy, value);
  const Matrix latents = nn::matrix_from_json(pj.at("latents"));
  const int k = static_cast<int>(latents.rows());
  std::vector<int> ids(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) ids[static_cast<std::size_t>(i)] = i;

  SeedStreams streams = seed_everything(config.seed, "eval");
  const auto trajs = rollout_latents(policy, spec, latents, ids, config.eval_rollouts,
                                     config.eval_deterministic, streams.policy);
  const agents::SkillConditionedPolicy untrained(policy.config(), streams.model);
  const auto random = rollout_latents(untrained, spec, latents, ids, config.random_rollouts,
                                      false, streams.policy);
  const nlohmann::json start = {spec.start_tile.x(), spec.start_tile.y()};
  dir.write("eval/trajectories.json", {{"maze", spec.name},
                                       {"method", to_string(config.method)},
                                       {"start_tile", start},
                                       {"rollouts_per_skill", config.eval_rollouts},
                                       {"trajectories", trajectories_to_json(trajs)}});
  dir.write("eval/random.json", {{"maze", spec.name},
                                 {"method", "random"},
                                 {"start_tile", start},
                                 {"rollouts_per_skill", config.random_rollouts},
                                 {"trajectories", trajectories_to_json(random)}});
  nlohmann::json summary = {{"coverage", coverage_metric(trajs, spec)},
                            {"random_coverage", coverage_metric(random, spec)},
                            {"cell", 0.5}};

  std::unique_ptr<density::VqVae> vq;
  std::unique_ptr<density::SkillDiscriminator> disc;
  std::unique_ptr<density::SkillDensityModel> dens;
  std::unique_ptr<rewards::RewardEngine> engine;
  Rng scratch(0);
  if (config.method == Method::kEdl) {
    vq = std::make_unique<density::VqVae>(density::VqVae::from_json(dir.read("codebook.json")));
    engine = std::make_unique<rewards::EdlReward>(*vq);
    const Matrix goals = extract_goals(*vq);
    nlohmann::json g = nlohmann::json::array();
    for (Index i = 0; i < goals.rows(); ++i) g.push_back({goals(i, 0), goals(i, 1)});
    dir.write("eval/goals.json", {{"maze", spec.name}, {"goals", g}});
    summary["goal_distance"] = nlohmann::json::array();
    const Matrix term = mean_terminal_states(trajs, k);
    for (int i = 0; i < k; ++i) {
      summary["goal_distance"].push_back((term.row(i) - goals.row(i)).norm());
    }
  } else {
    const nlohmann::json mj = dir.read("model.json");
    if (config.method == Method::kReverse) {
      disc = std::make_unique<density::SkillDiscriminator>(
          density::DiscriminatorConfig::from_json(mj.at("config")), scratch);
      nn::load_checkpoint(mj.at("parameters"), disc->named_parameters(),
                          {{"input", &disc->normalizer()}});
      engine = std::make_unique<rewards::ReverseMIReward>(
          *disc, dist::CategoricalDist::uniform(disc->config().skills));
    } else {
      dens = std::make_unique<density::SkillDensityModel>(
          density::SkillDensityConfig::from_json(mj.at("config")), scratch);
      nn::load_checkpoint(mj.at("parameters"), dens->named_parameters(),
                          {{"input", &dens->normalizer()}});
      engine = std::make_unique<rewards::ForwardMIReward>(*dens);
    }
  }
  for (int z = 0; z < engine->skills(); ++z) {
    dir.write("eval/landscape-" + std::to_string(z) + ".json",
              rewards::reward_landscape(*engine, spec, z, config.landscape_resolution).to_json());
  }
  dir.write("eval/coverage.json", summary);

  if (options.interpolate) {
    const auto [i, j] = *options.interpolate;
    if (options.steps < 2) throw std::invalid_argument("interpolation needs at least 2 steps");
    std::vector<double> w(static_cast<std::size_t>(options.steps));
    for (int s = 0; s < options.steps; ++s) {
      w[static_cast<std::size_t>(s)] = static_cast<double>(s) / (options.steps - 1);
    }
    const Matrix z = interpolate_skills(latents, i, j, w);
    std::vector<int> zid(static_cast<std::size_t>(options.steps));
    for (int s = 0; s < options.steps; ++s) zid[static_cast<std::size_t>(s)] = s;
    const auto it = rollout_latents(policy, spec, z, zid, config.eval_rollouts,
                                    config.eval_deterministic, streams.sampling);
    nlohmann::json sets = nlohmann::json::array();
    for (int s = 0; s < options.steps; ++s) {
      std::vector<env::Trajectory> part(it.begin() + s * config.eval_rollouts,
                                        it.begin() + (s + 1) * config.eval_rollouts);
      sets.push_back({{"weight", w[static_cast<std::size_t>(s)]},
                      {"latent", std::vector<double>(z.row(s).data(), z.row(s).data() + z.cols())},
                      {"trajectories", trajectories_to_json(part)}});
    }
    dir.write("eval/interpolation.json",
              {{"maze", spec.name}, {"i", i}, {"j", j}, {"weights", w}, {"sets", sets}});
  }
  return summary;
}

}  // namespace skilllab::pipeline
