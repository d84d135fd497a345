#include "skilllab/agents/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace skilllab::agents {

// ---- environments -----------------------------------------------------------

MazeEnvironment::MazeEnvironment(env::MazeSpec spec, std::optional<env::Vec2> goal)
    : spec_(std::move(spec)), goal_(goal) {
  spec_.validate();
}

Eigen::VectorXd MazeEnvironment::reset(Rng& rng) const {
  return env::reset(spec_, rng).position;
}

Eigen::VectorXd MazeEnvironment::step(const Eigen::VectorXd& state,
                                      const Eigen::VectorXd& action,
                                      double& reward) const {
  env::MazeState s;
  s.position = state.head<2>();
  const auto r = env::step(spec_, s, action.head<2>());
  reward = goal_ ? -(r.state.position - *goal_).norm() : 0.0;
  return r.state.position;
}

Eigen::VectorXd BanditEnvironment::step(const Eigen::VectorXd& state,
                                        const Eigen::VectorXd& action,
                                        double& reward) const {
  if (std::abs(action[0]) > bound_ + 1e-12) {
    throw std::out_of_range("bandit action exceeds bound");
  }
  reward = -(action[0] - target_) * (action[0] - target_);
  return state;
}

// ---- skills -----------------------------------------------------------------

SkillSet SkillSet::one_hot(int n) {
  return {Matrix::Identity(n, n), dist::CategoricalDist::uniform(n)};
}

SkillSet SkillSet::from_codes(const Matrix& codes) {
  return {codes, dist::CategoricalDist::uniform(static_cast<int>(codes.rows()))};
}

SkillSet SkillSet::none() { return {Matrix(1, 0), dist::CategoricalDist::uniform(1)}; }

// ---- buffer -----------------------------------------------------------------

int RolloutBuffer::episode_length(int e) const {
  const int end = e + 1 < episodes() ? episode_start[e + 1] : static_cast<int>(size());
  return end - episode_start[e];
}

std::vector<env::Trajectory> RolloutBuffer::trajectories() const {
  if (states.cols() != 2) {
    throw nn::ShapeError("trajectories() requires 2-D maze states");
  }
  std::vector<env::Trajectory> out;
  for (int e = 0; e < episodes(); ++e) {
    env::Trajectory t;
    t.skill = episode_skill[e];
    t.latent = latents.row(e).transpose();
    const int begin = episode_start[e];
    for (int i = begin; i < begin + episode_length(e); ++i) {
      t.steps.push_back({states.row(i).transpose(), actions.row(i).transpose(),
                         rewards[i], next_states.row(i).transpose()});
    }
    t.terminal = true;
    out.push_back(std::move(t));
  }
  return out;
}

RolloutBuffer RolloutBuffer::select_episodes(std::span<const int> chosen) const {
  std::vector<int> rows;
  RolloutBuffer out;
  for (int e : chosen) {
    out.episode_start.push_back(static_cast<int>(rows.size()));
    out.episode_skill.push_back(episode_skill[e]);
    const int begin = episode_start[e];
    for (int i = begin; i < begin + episode_length(e); ++i) rows.push_back(i);
  }
  const auto n = static_cast<Index>(rows.size());
  auto take = [&](const Matrix& m) {
    Matrix r(n, m.cols());
    for (Index i = 0; i < n; ++i) r.row(i) = m.row(rows[i]);
    return r;
  };
  auto take_vec = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd r(n);
    if (v.size() == 0) return Eigen::VectorXd();
    for (Index i = 0; i < n; ++i) r[i] = v[rows[i]];
    return r;
  };
  out.inputs = take(inputs);
  out.states = take(states);
  out.next_states = take(next_states);
  out.actions = take(actions);
  out.log_probs = take_vec(log_probs);
  out.values = take_vec(values);
  out.rewards = take_vec(rewards);
  out.advantages = take_vec(advantages);
  out.returns = take_vec(returns);
  out.latents = Matrix(static_cast<Index>(chosen.size()), latents.cols());
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    out.latents.row(static_cast<Index>(k)) = latents.row(chosen[k]);
  }
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const int e = chosen[k];
    for (int i = 0; i < episode_length(e); ++i) {
      out.skills.push_back(episode_skill[e]);
      out.episode_of.push_back(static_cast<int>(k));
    }
  }
  return out;
}

// ---- collection -------------------------------------------------------------

RolloutBuffer collect_episodes(SkillConditionedPolicy& policy, const ValueNet* value,
                               const Environment& env, const Matrix& latents,
                               std::span<const int> skill_ids,
                               const CollectOptions& options, Rng& rng) {
  const auto n_env = latents.rows();
  if (static_cast<Index>(skill_ids.size()) != n_env) {
    throw nn::ShapeError("collect_episodes: one skill id per latent row required");
  }
  if (env.state_dim() != policy.config().state_dim ||
      env.action_dim() != policy.config().action_dim) {
    throw nn::ShapeError("collect_episodes: policy does not match environment");
  }
  const int horizon = env.horizon();
  const int sd = env.state_dim();
  const int ad = env.action_dim();
  const Index total = n_env * horizon;

  RolloutBuffer buf;
  buf.inputs.resize(total, policy.input_dim());
  buf.states.resize(total, sd);
  buf.next_states.resize(total, sd);
  buf.actions.resize(total, ad);
  buf.log_probs.resize(total);
  buf.values = value ? Eigen::VectorXd(total) : Eigen::VectorXd();
  buf.rewards.resize(total);
  buf.latents = latents;
  buf.skills.resize(static_cast<std::size_t>(total));
  buf.episode_of.resize(static_cast<std::size_t>(total));
  for (Index e = 0; e < n_env; ++e) {
    buf.episode_start.push_back(static_cast<int>(e * horizon));
    buf.episode_skill.push_back(skill_ids[e]);
  }

  Matrix state(n_env, sd);
  Rng& reset_rng = options.reset_rng ? *options.reset_rng : rng;
  for (Index e = 0; e < n_env; ++e) state.row(e) = env.reset(reset_rng).transpose();

  Matrix alpha, beta;
  for (int t = 0; t < horizon; ++t) {
    if (options.update_normalizer && policy.config().normalize_input) {
      policy.normalizer().observe_rows(state);
    }
    const Matrix input = policy.make_input(state, latents);
    policy.infer(input, alpha, beta);
    Eigen::VectorXd v;
    if (value) v = value->infer(input);
    for (Index e = 0; e < n_env; ++e) {
      const Index row = e * horizon + t;
      const auto d = dist::make_scaled_beta(alpha.row(e).transpose(),
                                            beta.row(e).transpose(), policy.low(),
                                            policy.high());
      const Eigen::VectorXd a = options.deterministic ? d.mean() : dist::beta_sample(d, rng);
      double r = 0.0;
      const Eigen::VectorXd next = env.step(state.row(e).transpose(), a, r);
      buf.inputs.row(row) = input.row(e);
      buf.states.row(row) = state.row(e);
      buf.next_states.row(row) = next.transpose();
      buf.actions.row(row) = a.transpose();
      buf.log_probs[row] = dist::beta_log_prob(d, a);
      if (value) buf.values[row] = v[e];
      buf.rewards[row] = r;
      buf.skills[static_cast<std::size_t>(row)] = skill_ids[e];
      buf.episode_of[static_cast<std::size_t>(row)] = static_cast<int>(e);
      state.row(e) = next.transpose();
    }
  }
  return buf;
}

RolloutBuffer collect_rollouts(SkillConditionedPolicy& policy, const ValueNet* value,
                               const Environment& env, const SkillSet& skills,
                               const CollectOptions& options, Rng& rng) {
  const int horizon = env.horizon();
  int episodes = (options.n_steps + horizon - 1) / horizon;
  if (options.paired_episodes && episodes % 2 == 1) ++episodes;
  std::vector<int> ids(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    if (options.paired_episodes && e % 2 == 1) {
      ids[e] = ids[e - 1];
    } else {
      ids[e] = dist::categorical_sample(skills.prior, rng);
    }
  }
  Matrix latents(episodes, skills.latents.cols());
  for (int e = 0; e < episodes; ++e) latents.row(e) = skills.latents.row(ids[e]);
  return collect_episodes(policy, value, env, latents, ids, options, rng);
}

void add_intrinsic_rewards(RolloutBuffer& buffer, const RewardFn& reward) {
  const Eigen::VectorXd r = reward(buffer.next_states, buffer.skills);
  if (r.size() != buffer.size()) {
    throw nn::ShapeError("reward function returned the wrong number of rewards");
  }
  buffer.rewards += r;
}

// ---- advantages -------------------------------------------------------------

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double bootstrap, double gamma, double lambda) {
  if (rewards.size() != values.size()) {
    throw nn::ShapeError("compute_gae: rewards and values differ in length");
  }
  const auto n = static_cast<Index>(rewards.size());
  GaeResult out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  double running = 0.0;
  for (Index t = n - 1; t >= 0; --t) {
    const double next_v = t + 1 < n ? values[t + 1] : bootstrap;
    const double delta = rewards[t] + gamma * next_v - values[t];
    running = delta + gamma * lambda * running;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
  }
  return out;
}

void compute_buffer_advantages(RolloutBuffer& buffer, double gamma, double lambda) {
  if (buffer.values.size() != buffer.size()) {
    throw std::logic_error("compute_buffer_advantages: buffer has no value estimates");
  }
  buffer.advantages.resize(buffer.size());
  buffer.returns.resize(buffer.size());
  for (int e = 0; e < buffer.episodes(); ++e) {
    const int b = buffer.episode_start[e];
    const int len = buffer.episode_length(e);
    const auto g = compute_gae({buffer.rewards.data() + b, static_cast<std::size_t>(len)},
                               {buffer.values.data() + b, static_cast<std::size_t>(len)},
                               0.0, gamma, lambda);
    buffer.advantages.segment(b, len) = g.advantages;
    buffer.returns.segment(b, len) = g.returns;
  }
}

// ---- PPO --------------------------------------------------------------------

const std::vector<double>& PPOConfig::entropy_grid() {
  static const std::vector<double> grid{0.001, 0.005, 0.01, 0.025};
  return grid;
}

const std::vector<double>& PPOConfig::lr_grid() {
  static const std::vector<double> grid{0.0003, 0.001};
  return grid;
}

void PPOConfig::validate() const {
  if (!(gamma > 0 && gamma <= 1)) throw std::invalid_argument("gamma must be in (0, 1]");
  if (!(gae_lambda >= 0 && gae_lambda <= 1)) {
    throw std::invalid_argument("gae_lambda must be in [0, 1]");
  }
  if (batch_size <= 0 || epochs <= 0 || horizon <= 0) {
    throw std::invalid_argument("batch_size, epochs and horizon must be positive");
  }
  if (!(lr > 0)) throw std::invalid_argument("lr must be positive");
  if (!(clip_ratio > 0)) throw std::invalid_argument("clip_ratio must be positive");
}

nlohmann::json PPOConfig::to_json() const {
  return {{"gamma", gamma},
          {"gae_lambda", gae_lambda},
          {"entropy_coef", entropy_coef},
          {"lr", lr},
          {"horizon", horizon},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"clip_ratio", clip_ratio},
          {"normalize_advantages", normalize_advantages},
          {"value_coef", value_coef},
          {"max_grad_norm", max_grad_norm},
          {"entropy_mode", entropy_mode == EntropyMode::kAnalytic ? "analytic" : "sampled"}};
}

PPOConfig PPOConfig::from_json(const nlohmann::json& j) {
  PPOConfig c;
  c.gamma = j.at("gamma").get<double>();
  c.gae_lambda = j.at("gae_lambda").get<double>();
  c.entropy_coef = j.at("entropy_coef").get<double>();
  c.lr = j.at("lr").get<double>();
  c.horizon = j.at("horizon").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.clip_ratio = j.at("clip_ratio").get<double>();
  c.normalize_advantages = j.at("normalize_advantages").get<bool>();
  c.value_coef = j.at("value_coef").get<double>();
  c.max_grad_norm = j.at("max_grad_norm").get<double>();
  const auto mode = j.at("entropy_mode").get<std::string>();
  if (mode != "analytic" && mode != "sampled") {
    throw std::invalid_argument("entropy_mode must be 'analytic' or 'sampled'");
  }
  c.entropy_mode = mode == "analytic" ? EntropyMode::kAnalytic : EntropyMode::kSampled;
  c.validate();
  return c;
}

LossParts ppo_loss(const SkillConditionedPolicy& policy, const ValueNet& value,
                   const Matrix& inputs, const Matrix& actions,
                   const Eigen::VectorXd& old_log_probs,
                   const Eigen::VectorXd& advantages, const Eigen::VectorXd& returns,
                   const PPOConfig& config) {
  const Var in = Var::constant(inputs);
  const auto head = policy.forward(in);
  const Var logp = dist::beta_log_prob(head.alpha, head.beta, actions, policy.low(),
                                       policy.high());
  const Var ratio = nn::exp(logp - Var::constant(old_log_probs));
  const Var adv = Var::constant(advantages);
  const Var surr1 = ratio * adv;
  const Var surr2 = nn::clamp(ratio, 1.0 - config.clip_ratio, 1.0 + config.clip_ratio) * adv;

  LossParts parts;
  parts.policy_loss = -nn::mean(nn::minimum(surr1, surr2));
  parts.entropy = config.entropy_mode == EntropyMode::kAnalytic
                      ? nn::mean(dist::beta_entropy(head.alpha, head.beta, policy.low(),
                                                    policy.high()))
                      : -nn::mean(logp);
  const Matrix target = value.target_normalizer().normalize_rows(returns);
  parts.value_loss = nn::mean(nn::square(value.forward(in) - Var::constant(target)));
  parts.total = parts.policy_loss - config.entropy_coef * parts.entropy +
                config.value_coef * parts.value_loss;
  parts.clip_fraction =
      ((ratio.value().array() - 1.0).abs() > config.clip_ratio).cast<double>().mean();
  return parts;
}

PPOTrainer::PPOTrainer(SkillConditionedPolicy& policy, ValueNet& value, PPOConfig config)
    : policy_(policy), value_(value), config_(config) {
  config_.validate();
  std::vector<Var> params = policy_.parameters();
  for (auto& p : value_.parameters()) params.push_back(p);
  optimizer_ = nn::Adam(std::move(params), {config_.lr, 0.9, 0.999, 1e-8});
}

PPOMetrics PPOTrainer::update(const RolloutBuffer& buffer, Rng& rng) {
  const Index n = buffer.size();
  if (n == 0) return {.skipped = true};
  if (buffer.advantages.size() != n || buffer.returns.size() != n) {
    throw std::logic_error("PPOTrainer::update: advantages not computed");
  }
  Eigen::VectorXd adv = buffer.advantages;
  if (config_.normalize_advantages) {
    const double m = adv.mean();
    const double sd = std::sqrt((adv.array() - m).square().mean());
    adv = ((adv.array() - m) / (sd + 1e-8)).matrix();
  }

  value_.target_normalizer().observe_rows(buffer.returns);

  PPOMetrics metrics;
  int used = 0;
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Index start = 0; start < n; start += config_.batch_size) {
      const Index m = std::min<Index>(config_.batch_size, n - start);
      Matrix in(m, buffer.inputs.cols()), act(m, buffer.actions.cols());
      Eigen::VectorXd old(m), a(m), ret(m);
      for (Index i = 0; i < m; ++i) {
        const Index r = order[static_cast<std::size_t>(start + i)];
        in.row(i) = buffer.inputs.row(r);
        act.row(i) = buffer.actions.row(r);
        old[i] = buffer.log_probs[r];
        a[i] = adv[r];
        ret[i] = buffer.returns[r];
      }
      const auto parts = ppo_loss(policy_, value_, in, act, old, a, ret, config_);
      if (parts.total.nonfinite() || !std::isfinite(parts.total.item())) {
        ++metrics.skipped_minibatches;
        continue;
      }
      optimizer_.zero_grad();
      nn::backward(parts.total);
      if (config_.max_grad_norm > 0) {
        nn::clip_grad_norm(optimizer_.params(), config_.max_grad_norm);
      }
      try {
        optimizer_.step();
      } catch (const nn::NonFiniteError&) {
        ++metrics.skipped_minibatches;
        continue;
      }
      metrics.policy_loss += parts.policy_loss.item();
      metrics.value_loss += parts.value_loss.item();
      metrics.entropy += parts.entropy.item();
      metrics.clip_fraction += parts.clip_fraction;
      ++used;
    }
  }
  if (used > 0) {
    metrics.policy_loss /= used;
    metrics.value_loss /= used;
    metrics.entropy /= used;
    metrics.clip_fraction /= used;
  }
  metrics.skipped = metrics.skipped_minibatches > 0;
  return metrics;
}

}  // namespace skilllab::agents
