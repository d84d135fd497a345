#include "skilllab/exploration.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "skilllab/rewards.hpp"

namespace skilllab::explore {

StateBuffer::StateBuffer(Index capacity, Index dim)
    : capacity_(capacity), data_(capacity, dim), source_(static_cast<std::size_t>(capacity), -1) {
  if (capacity < 1) throw std::invalid_argument("StateBuffer capacity must be positive");
}

void StateBuffer::push(const Eigen::VectorXd& state, int source) {
  if (state.size() != dim()) throw nn::ShapeError("StateBuffer: state size mismatch");
  data_.row(head_) = state.transpose();
  source_[static_cast<std::size_t>(head_)] = source;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

void StateBuffer::push_rows(const Matrix& states, int source) {
  for (Index i = 0; i < states.rows(); ++i) push(states.row(i).transpose(), source);
}

Matrix StateBuffer::sample(Index n, Rng& rng) const {
  if (size_ == 0) throw std::logic_error("cannot sample from an empty state buffer");
  const Index oldest = full() ? head_ : 0;
  std::uniform_int_distribution<Index> pick(0, size_ - 1);
  Matrix out(n, dim());
  for (Index i = 0; i < n; ++i) out.row(i) = data_.row((oldest + pick(rng)) % capacity_);
  return out;
}

Matrix StateBuffer::contents() const {
  const Index oldest = full() ? head_ : 0;
  Matrix out(size_, dim());
  for (Index i = 0; i < size_; ++i) out.row(i) = data_.row((oldest + i) % capacity_);
  return out;
}

std::vector<int> StateBuffer::sources() const {
  const Index oldest = full() ? head_ : 0;
  std::vector<int> out(static_cast<std::size_t>(size_));
  for (Index i = 0; i < size_; ++i) {
    out[static_cast<std::size_t>(i)] = source_[static_cast<std::size_t>((oldest + i) % capacity_)];
  }
  return out;
}

nlohmann::json StateBuffer::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  const Matrix c = contents();
  for (Index i = 0; i < c.rows(); ++i) {
    arr.push_back(std::vector<double>(c.row(i).data(), c.row(i).data() + c.cols()));
  }
  return arr;
}

StateBuffer StateBuffer::from_json(const nlohmann::json& j, Index capacity) {
  if (!j.is_array()) throw std::invalid_argument("state buffer JSON must be an array");
  const Index dim = j.empty() ? 2 : static_cast<Index>(j.front().size());
  StateBuffer b(std::max<Index>(capacity, static_cast<Index>(j.size())), dim);
  for (const auto& row : j) {
    const auto v = row.get<std::vector<double>>();
    b.push(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size())));
  }
  return b;
}

Matrix oracle_sample(const env::MazeSpec& spec, Index n, Rng& rng,
                     const std::optional<env::Box>& region) {
  env::Box box = spec.extent();
  if (region) {
    box.x0 = std::max(box.x0, region->x0);
    box.y0 = std::max(box.y0, region->y0);
    box.x1 = std::min(box.x1, region->x1);
    box.y1 = std::min(box.y1, region->y1);
  }
  Matrix out(n, 2);
  if (n == 0) return out;
  if (!(box.x1 > box.x0 && box.y1 > box.y0)) {
    throw std::runtime_error("oracle_sample: sampling region has no free area");
  }
  std::uniform_real_distribution<double> ux(box.x0, box.x1), uy(box.y0, box.y1);
  long attempts = 0;
  long rejected = 0;
  for (Index i = 0; i < n;) {
    const env::Vec2 p(ux(rng), uy(rng));
    ++attempts;
    if (env::is_free(spec, p)) {
      out.row(i++) = p.transpose();
    } else {
      ++rejected;
    }
    if (attempts >= 1000 && rejected > 0.999 * static_cast<double>(attempts)) {
      throw std::runtime_error("oracle_sample: rejection rate above 99.9%");
    }
  }
  return out;
}

const std::vector<double>& SmmConfig::alpha_grid() {
  static const std::vector<double> grid{0.1, 1.0, 10.0};
  return grid;
}

const std::vector<double>& SmmConfig::vae_beta_grid() { return density::VaeConfig::beta_grid(); }

void SmmConfig::validate() const {
  if (members < 1) throw std::invalid_argument("SMM mixture needs at least one member");
  if (buffer_capacity < 1 || round_steps < 1 || batch_size < 1 || policy_epochs < 1) {
    throw std::invalid_argument("SMM capacity, round_steps and batch_size must be positive");
  }
  if (vae_steps_per_round < 0 || discriminator_steps_per_round < 0) {
    throw std::invalid_argument("SMM step counts must be non-negative");
  }
}

nlohmann::json SmmConfig::to_json() const {
  return {{"members", members},
          {"alpha", alpha},
          {"vae_beta", vae_beta},
          {"vae_lr", vae_lr},
          {"discriminator_lr", discriminator_lr},
          {"policy_lr", policy_lr},
          {"batch_size", batch_size},
          {"buffer_capacity", buffer_capacity},
          {"round_steps", round_steps},
          {"policy_epochs", policy_epochs},
          {"vae_steps_per_round", vae_steps_per_round},
          {"discriminator_steps_per_round", discriminator_steps_per_round},
          {"hidden_units", hidden_units},
          {"hidden_layers", hidden_layers}};
}

SmmConfig SmmConfig::from_json(const nlohmann::json& j) {
  SmmConfig c;
  c.members = j.at("members").get<int>();
  c.alpha = j.at("alpha").get<double>();
  c.vae_beta = j.at("vae_beta").get<double>();
  c.vae_lr = j.at("vae_lr").get<double>();
  c.discriminator_lr = j.at("discriminator_lr").get<double>();
  c.policy_lr = j.at("policy_lr").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.buffer_capacity = j.at("buffer_capacity").get<Index>();
  c.round_steps = j.at("round_steps").get<int>();
  c.policy_epochs = j.at("policy_epochs").get<int>();
  c.vae_steps_per_round = j.at("vae_steps_per_round").get<int>();
  c.discriminator_steps_per_round = j.at("discriminator_steps_per_round").get<int>();
  c.hidden_units = j.at("hidden_units").get<int>();
  c.hidden_layers = j.at("hidden_layers").get<int>();
  c.validate();
  return c;
}

nlohmann::json SmmRound::to_json() const {
  return {{"round", round},
          {"member", member},
          {"reward_mean", reward_mean},
          {"density_reward_mean", density_reward_mean},
          {"vae_loss", vae_loss},
          {"discriminator_loss", discriminator_loss}};
}

namespace {
struct Member {
  agents::SkillConditionedPolicy policy;
  agents::ValueNet value;
  std::unique_ptr<agents::PPOTrainer> trainer;
};
}  // namespace

SmmResult smm_train(const env::MazeSpec& spec, const SmmConfig& config, Rng& rng) {
  config.validate();
  const agents::MazeEnvironment environment(spec);

  agents::NetworkConfig net;
  net.hidden_units = config.hidden_units;
  net.hidden_layers = config.hidden_layers;
  net.action_bound = spec.action_bound;
  net.normalize_input = false;

  agents::PPOConfig ppo;
  ppo.lr = config.policy_lr;
  ppo.entropy_coef = 0.0;
  ppo.horizon = config.round_steps;
  ppo.batch_size = std::max(1, config.round_steps / 10);
  ppo.epochs = config.policy_epochs;

  std::vector<std::unique_ptr<Member>> members;
  for (int k = 0; k < config.members; ++k) {
    auto m = std::make_unique<Member>();
    m->policy = agents::SkillConditionedPolicy(net, rng);
    m->value = agents::ValueNet(net, rng);
    m->trainer = std::make_unique<agents::PPOTrainer>(m->policy, m->value, ppo);
    members.push_back(std::move(m));
  }

  density::VaeConfig vc;
  vc.beta = config.vae_beta;
  vc.lr = config.vae_lr;
  vc.batch_size = config.batch_size;
  vc.hidden_units = config.hidden_units;
  vc.hidden_layers = config.hidden_layers;
  density::GaussianVAE vae(vc, rng);

  density::DiscriminatorConfig dc;
  dc.skills = config.members;
  dc.lr = config.discriminator_lr;
  dc.batch_size = config.batch_size;
  dc.hidden_units = config.hidden_units;
  dc.hidden_layers = config.hidden_layers;
  dc.normalize_input = false;
  density::SkillDiscriminator disc(dc, rng);

  const rewards::SmmReward density_reward(vae, spec.free_area());
  const double log_members = std::log(static_cast<double>(config.members));

  SmmResult result{StateBuffer(config.buffer_capacity, 2), {}, {}, 0};
  agents::CollectOptions opts;
  opts.n_steps = config.round_steps;
  const agents::SkillSet none = agents::SkillSet::none();

  for (int round = 0; !result.buffer.full(); ++round) {
    const int k = round % config.members;
    Member& m = *members[static_cast<std::size_t>(k)];
    agents::RolloutBuffer batch =
        agents::collect_rollouts(m.policy, &m.value, environment, none, opts, rng);
    result.steps += static_cast<int>(batch.size());
    result.buffer.push_rows(batch.next_states, k);

    SmmRound log{round, k, 0, 0, 0, 0};
    for (int s = 0; s < config.vae_steps_per_round; ++s) {
      log.vae_loss = vae.train_step(result.buffer.sample(config.batch_size, rng), rng).loss;
    }
    if (config.members > 1 && config.discriminator_steps_per_round > 0) {
      const Matrix states = result.buffer.contents();
      const auto src = result.buffer.sources();
      std::uniform_int_distribution<Index> pick(0, states.rows() - 1);
      const Index n = static_cast<Index>(config.discriminator_steps_per_round) * config.batch_size;
      Matrix xs(n, 2);
      std::vector<int> ys(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) {
        const Index r = pick(rng);
        xs.row(i) = states.row(r);
        ys[static_cast<std::size_t>(i)] = src[static_cast<std::size_t>(r)];
      }
      log.discriminator_loss = disc.train_epoch(xs, ys, rng);
    }

    const std::vector<int> zero(static_cast<std::size_t>(batch.size()), 0);
    const Eigen::VectorXd r_density = density_reward.rewards(batch.next_states, zero);
    Eigen::VectorXd r = r_density - config.alpha * batch.log_probs;
    if (config.members > 1) {
      const Matrix lp = disc.log_probs(batch.next_states);
      r += (lp.col(k).array() + log_members).matrix();
    }
    batch.rewards += r;
    log.reward_mean = r.mean();
    log.density_reward_mean = r_density.mean();
    agents::compute_buffer_advantages(batch, ppo.gamma, ppo.gae_lambda);
    m.trainer->update(batch, rng);
    result.history.push_back(log);
  }
  for (auto& m : members) result.policies.push_back(m->policy);
  return result;
}

StateBuffer random_policy_buffer(const env::MazeSpec& spec, Index n, Rng& rng) {
  const agents::MazeEnvironment environment(spec);
  agents::NetworkConfig net;
  net.action_bound = spec.action_bound;
  net.normalize_input = false;
  agents::SkillConditionedPolicy policy(net, rng);
  agents::CollectOptions opts;
  opts.n_steps = static_cast<int>(n);
  opts.update_normalizer = false;
  const auto batch = agents::collect_rollouts(policy, nullptr, environment,
                                              agents::SkillSet::none(), opts, rng);
  StateBuffer b(n, 2);
  b.push_rows(batch.next_states.topRows(std::min<Index>(n, batch.size())));
  return b;
}

double discretized_entropy(const Matrix& states, const env::MazeSpec& spec, int cells) {
  if (states.rows() == 0) return 0.0;
  std::vector<double> counts(static_cast<std::size_t>(cells) * cells, 0.0);
  for (Index i = 0; i < states.rows(); ++i) {
    const int cx = std::clamp(static_cast<int>(states(i, 0) / spec.width * cells), 0, cells - 1);
    const int cy = std::clamp(static_cast<int>(states(i, 1) / spec.height * cells), 0, cells - 1);
    counts[static_cast<std::size_t>(cy) * cells + cx] += 1.0;
  }
  double h = 0.0;
  const double n = static_cast<double>(states.rows());
  for (double c : counts) {
    if (c > 0) h -= c / n * std::log(c / n);
  }
  return h;
}

}  // namespace skilllab::explore
