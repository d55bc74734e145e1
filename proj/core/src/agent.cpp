#include "gcrl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>
#include <utility>

#include "gcrl/errors.hpp"

namespace gcrl {

using autograd::Tape;
using autograd::Var;

std::string_view to_string(TrainRewardMode mode) { return mode == TrainRewardMode::sparse ? "sparse" : "dense"; }

TrainRewardMode train_reward_mode_from_string(std::string_view name) {
  if (name == "sparse") return TrainRewardMode::sparse;
  if (name == "dense") return TrainRewardMode::dense;
  throw DomainError("unknown reward mode '" + std::string(name) + "' (expected sparse or dense)");
}

namespace {

// Independent streams per purpose, all derived from the run seed.
enum StreamTag : std::uint32_t { kCriticInit = 1, kActorInit = 2, kReplay = 3, kExplore = 4, kEval = 5 };

Rng derive_rng(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t tag) { return derive_rng(seed, tag)(); }

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError("train config: " + message);
}

Vec row(const Matrix& m, Eigen::Index r) { return m.row(r).transpose(); }

}  // namespace

void TrainConfig::validate() const {
  require(epochs >= 0, "epochs must be >= 0");
  require(episodes_per_epoch >= 1, "episodes_per_epoch must be >= 1");
  require(updates_per_episode >= 0, "updates_per_episode must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(buffer_capacity >= 1, "buffer_capacity must be >= 1");
  require(actor_lr > 0.0 && critic_lr > 0.0, "learning rates must be positive");
  require(polyak > 0.0 && polyak < 1.0, "polyak must lie in (0, 1)");
  require(exploration_noise_scale >= 0.0, "exploration_noise_scale must be >= 0");
  require(random_action_prob >= 0.0 && random_action_prob <= 1.0, "random_action_prob must lie in [0, 1]");
  require(her_ratio >= 0.0 && her_ratio <= 1.0, "her_ratio must lie in [0, 1]");
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  require(action_l2 >= 0.0, "action_l2 must be >= 0");
  require(eval_episodes >= 1, "eval_episodes must be >= 1");
  require(stop_at_success >= 0.0 && stop_at_success <= 1.0, "stop_at_success must lie in [0, 1]");
  require(latent_dim > 0 && embed_dim > 0, "latent_dim and embed_dim must be positive");
  potential().validate();
}

PotentialSpec TrainConfig::potential() const {
  PotentialSpec spec = shaping;
  spec.gamma = gamma;
  return spec;
}

// ---- storage ----

GoalTransition EpisodeTrace::transition(std::size_t t) const {
  if (t >= length()) throw IndexError("step " + std::to_string(t) + " outside an episode of length " + std::to_string(length()));
  const auto r = static_cast<Eigen::Index>(t);
  return {row(obs, r), row(actions, r), row(obs, r + 1), row(achieved, r), rewards[r], t + 1 == length(), goal};
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
  if (capacity == 0) throw DomainError("replay capacity must be positive");
}

void ReplayBuffer::store(EpisodeTrace trace) {
  if (trace.length() == 0) throw DomainError("cannot store an empty episode");
  if (episodes_.size() < capacity_) {
    episodes_.push_back(std::move(trace));
  } else {
    episodes_[next_] = std::move(trace);
  }
  next_ = (next_ + 1) % capacity_;
  ++stored_;
}

const EpisodeTrace& ReplayBuffer::episode(std::size_t i) const {
  if (i >= episodes_.size()) throw IndexError("episode " + std::to_string(i) + " not in buffer");
  return episodes_[i];
}

// ---- collection ----

EpisodeTrace collect_episode(GoalEnv& env, const ActorParams& actor, double noise_scale, double random_action_prob,
                             Rng& rng) {
  const double bound = env.action_bound();
  const int horizon = env.horizon();
  auto [obs, goal] = env.reset(rng);

  EpisodeTrace trace;
  trace.goal = goal;
  trace.obs.resize(horizon + 1, env.obs_dim());
  trace.actions.resize(horizon, env.action_dim());
  trace.achieved.resize(horizon, env.goal_dim());
  trace.rewards.resize(horizon);
  trace.obs.row(0) = obs.transpose();

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> box(-bound, bound);
  std::normal_distribution<double> noise(0.0, noise_scale > 0.0 ? noise_scale * bound : 1.0);
  int t = 0;
  for (bool done = false; !done; ++t) {
    Vec action = actor_forward(actor, obs, goal);
    if (unit(rng) < random_action_prob) {
      for (Eigen::Index i = 0; i < action.size(); ++i) action[i] = box(rng);
    } else if (noise_scale > 0.0) {
      for (Eigen::Index i = 0; i < action.size(); ++i) action[i] += noise(rng);
    }
    action = action.cwiseMax(-bound).cwiseMin(bound);
    StepResult step = env.step(action, rng);
    trace.actions.row(t) = action.transpose();
    trace.achieved.row(t) = step.achieved.transpose();
    trace.rewards[t] = step.reward;
    trace.obs.row(t + 1) = step.next_obs.transpose();
    obs = std::move(step.next_obs);
    done = step.done;
  }
  if (t < horizon) {
    trace.obs.conservativeResize(t + 1, Eigen::NoChange);
    trace.actions.conservativeResize(t, Eigen::NoChange);
    trace.achieved.conservativeResize(t, Eigen::NoChange);
    trace.rewards.conservativeResize(t);
  }
  return trace;
}

GoalTransition her_relabel(const EpisodeTrace& trace, std::size_t index, HerStrategy strategy, Rng& rng,
                           const GoalEnv& env) {
  GoalTransition tr = trace.transition(index);
  std::size_t source = trace.length() - 1;
  if (strategy == HerStrategy::future) {
    std::uniform_int_distribution<std::size_t> pick(index, trace.length() - 1);
    source = pick(rng);
  }
  tr.goal = row(trace.achieved, static_cast<Eigen::Index>(source));
  tr.reward = env.reward(tr.achieved, tr.goal);
  return tr;
}

SampledBatch sample_batch(ReplayBuffer& buffer, std::size_t batch_size, double her_ratio, HerStrategy strategy,
                          const GoalEnv& env) {
  if (buffer.empty()) throw StateError("cannot sample from an empty replay buffer");
  if (batch_size == 0) throw DomainError("batch size must be positive");
  Rng& rng = buffer.rng();
  const auto n = static_cast<Eigen::Index>(batch_size);
  SampledBatch b;
  b.obs.resize(n, env.obs_dim());
  b.action.resize(n, env.action_dim());
  b.next_obs.resize(n, env.obs_dim());
  b.achieved.resize(n, env.goal_dim());
  b.goal.resize(n, env.goal_dim());
  b.reward.resize(n);

  std::uniform_int_distribution<std::size_t> pick_episode(0, buffer.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const EpisodeTrace& trace = buffer.episode(pick_episode(rng));
    std::uniform_int_distribution<std::size_t> pick_step(0, trace.length() - 1);
    const std::size_t t = pick_step(rng);
    const bool relabel = unit(rng) < her_ratio;
    const GoalTransition tr = relabel ? her_relabel(trace, t, strategy, rng, env) : trace.transition(t);
    if (relabel) ++b.relabeled;
    b.obs.row(i) = tr.obs.transpose();
    b.action.row(i) = tr.action.transpose();
    b.next_obs.row(i) = tr.next_obs.transpose();
    b.achieved.row(i) = tr.achieved.transpose();
    b.goal.row(i) = tr.goal.transpose();
    b.reward[i] = tr.reward;
  }
  return b;
}

// ---- networks ----

AgentNets AgentNets::create(const GoalEnv& env, const TrainConfig& config) {
  MrnShape critic;
  critic.obs_dim = env.obs_dim();
  critic.action_dim = env.action_dim();
  critic.goal_dim = env.goal_dim();
  critic.encoder_hidden = config.critic_hidden;
  critic.latent_dim = config.latent_dim;
  critic.head_hidden = config.head_hidden;
  critic.sym_dim = config.embed_dim;
  critic.asym_dim = config.embed_dim;

  ActorShape actor;
  actor.obs_dim = env.obs_dim();
  actor.goal_dim = env.goal_dim();
  actor.action_dim = env.action_dim();
  actor.hidden = config.actor_hidden;
  actor.action_bound = env.action_bound();

  AgentNets nets{MrnParams::create(critic, derive_seed(config.seed, kCriticInit)), {},
                 ActorParams::create(actor, derive_seed(config.seed, kActorInit)), {}};
  nets.critic_target = nets.critic;
  nets.actor_target = nets.actor;
  return nets;
}

TargetBreakdown compute_targets(const SampledBatch& batch, const AgentNets& nets, const TrainConfig& config,
                                const GoalEnv& env) {
  const Eigen::Index n = batch.size();
  const double gamma = config.gamma;
  const Matrix next_action = actor_forward(nets.actor_target, batch.next_obs, batch.goal);
  const Eigen::VectorXd q_next = critic_forward(nets.critic_target, batch.next_obs, next_action, batch.goal);

  TargetBreakdown out;
  out.reward = batch.reward;
  out.lower = Eigen::VectorXd::Constant(n, -1.0 / (1.0 - gamma));
  if (config.reward_mode == TrainRewardMode::dense) {
    const PotentialSpec spec = config.potential();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec goal = row(batch.goal, i);
      const Vec here = row(batch.achieved, i);
      const Vec there = env.achieved_goal(row(batch.next_obs, i), row(next_action, i));
      auto span = [](const Vec& v) { return std::span<const double>(v.data(), static_cast<std::size_t>(v.size())); };
      const double d_here = vector_distance(spec.distance, span(here), span(goal));
      const double d_there = vector_distance(spec.distance, span(there), span(goal));
      out.reward[i] += shaping_bonus(potential_from_distance(d_here, spec), potential_from_distance(d_there, spec), gamma);
      out.lower[i] = projection_bounds_from_distance(d_here, spec).lower;
    }
  }
  out.target = out.reward + gamma * q_next;
  if (config.clip_target) out.target = out.target.cwiseMax(out.lower).cwiseMin(0.0);
  return out;
}

double critic_update(const SampledBatch& batch, AgentNets& nets, Optimizer& optimizer, const TrainConfig& config,
                     const GoalEnv& env) {
  TargetBreakdown t = compute_targets(batch, nets, config, env);
  CriticBatch cb{batch.obs, batch.action, batch.goal, std::move(t.target), {}};
  if (config.clip_loss) cb.clip = {std::move(t.lower), config.clip_gradient};
  CriticGradient g = critic_grad(nets.critic, cb);
  optimizer.step(nets.critic.arrays(), std::as_const(g.grad).arrays());
  return g.loss;
}

double actor_objective(const SampledBatch& batch, const AgentNets& nets) {
  const Matrix a = actor_forward(nets.actor, batch.obs, batch.goal);
  return critic_forward(nets.critic, batch.obs, a, batch.goal).mean();
}

double actor_update(const SampledBatch& batch, AgentNets& nets, Optimizer& optimizer, const TrainConfig& config) {
  ActorParams grad = nets.actor.zeros_like();
  Tape tape;
  Var obs = tape.constant_ref(batch.obs);
  Var goal = tape.constant_ref(batch.goal);
  Var action = actor_graph(tape, nets.actor, &grad, obs, goal);
  Var q = critic_graph(tape, nets.critic, nullptr, obs, action, goal);
  Var q_mean = tape.mean(q);
  Var loss = tape.neg(q_mean);
  if (config.action_l2 > 0.0) {
    Var penalty = tape.mean(tape.square(tape.scale(action, 1.0 / nets.actor.shape.action_bound)));
    loss = tape.add(loss, tape.scale(penalty, config.action_l2));
  }
  tape.backward(loss);
  optimizer.step(nets.actor.arrays(), std::as_const(grad).arrays());
  return q_mean.value()(0, 0);
}

void soft_update(std::vector<Matrix*> target, const std::vector<const Matrix*>& online, double polyak) {
  if (!(polyak >= 0.0 && polyak <= 1.0)) throw DomainError("polyak must lie in [0, 1]");
  if (target.size() != online.size()) throw DimensionError("soft_update: array counts differ");
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i]->rows() != online[i]->rows() || target[i]->cols() != online[i]->cols()) {
      throw DimensionError("soft_update: array " + std::to_string(i) + " shapes differ");
    }
  }
  for (std::size_t i = 0; i < target.size(); ++i) {
    *target[i] = polyak * *target[i] + (1.0 - polyak) * *online[i];
  }
}

void soft_update(MrnParams& target, const MrnParams& online, double polyak) {
  soft_update(target.arrays(), online.arrays(), polyak);
}

void soft_update(ActorParams& target, const ActorParams& online, double polyak) {
  soft_update(target.arrays(), online.arrays(), polyak);
}

double evaluate_success(GoalEnv& env, const ActorParams& actor, int episodes, Rng& rng) {
  if (episodes <= 0) throw DomainError("evaluation needs at least one episode");
  int hits = 0;
  for (int e = 0; e < episodes; ++e) {
    auto [obs, goal] = env.reset(rng);
    Vec last;
    for (bool done = false; !done;) {
      StepResult step = env.step(actor_forward(actor, obs, goal), rng);
      obs = std::move(step.next_obs);
      last = std::move(step.achieved);
      done = step.done;
    }
    if (env.goal_reached(last, goal)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(episodes);
}

// ---- trainer ----

Trainer::Trainer(const GoalEnv& env, TrainConfig config)
    : env_(env.clone()),
      eval_env_(env.clone()),
      config_((config.validate(), std::move(config))),
      nets_(AgentNets::create(env, config_)),
      buffer_(config_.buffer_capacity, derive_seed(config_.seed, kReplay)),
      critic_opt_({config_.optimizer, config_.critic_lr}, std::as_const(nets_.critic).arrays()),
      actor_opt_({config_.optimizer, config_.actor_lr}, std::as_const(nets_.actor).arrays()),
      explore_rng_(derive_rng(config_.seed, kExplore)),
      eval_rng_(derive_rng(config_.seed, kEval)) {}

CurveRow Trainer::run_epoch() {
  double loss_sum = 0.0;
  std::size_t updates = 0;
  for (int e = 0; e < config_.episodes_per_epoch; ++e) {
    buffer_.store(collect_episode(*env_, nets_.actor, config_.exploration_noise_scale, config_.random_action_prob,
                                  explore_rng_));
    for (int u = 0; u < config_.updates_per_episode; ++u) {
      const SampledBatch batch = sample_batch(buffer_, static_cast<std::size_t>(config_.batch_size), config_.her_ratio,
                                              config_.her_strategy, *env_);
      loss_sum += critic_update(batch, nets_, critic_opt_, config_, *env_);
      actor_update(batch, nets_, actor_opt_, config_);
      ++updates;
    }
    soft_update(nets_.critic_target, nets_.critic, config_.polyak);
    soft_update(nets_.actor_target, nets_.actor, config_.polyak);
  }
  ++epoch_;
  CurveRow row;
  row.epoch = epoch_;
  row.critic_loss = updates ? loss_sum / static_cast<double>(updates) : 0.0;
  row.success_rate = evaluate_success(*eval_env_, nets_.actor, config_.eval_episodes, eval_rng_);
  return row;
}

std::vector<CurveRow> Trainer::train(const std::function<void(const CurveRow&)>& on_epoch) {
  std::vector<CurveRow> curve;
  while (epoch_ < config_.epochs) {
    curve.push_back(run_epoch());
    if (on_epoch) on_epoch(curve.back());
    if (config_.stop_at_success > 0.0 && curve.back().success_rate >= config_.stop_at_success) break;
  }
  return curve;
}

std::vector<CurveRow> train(const GoalEnv& env, const TrainConfig& config,
                            const std::function<void(const CurveRow&)>& on_epoch) {
  Trainer trainer(env, config);
  return trainer.train(on_epoch);
}

std::optional<int> epochs_to_threshold(const std::vector<CurveRow>& curve, double threshold) {
  for (const CurveRow& r : curve) {
    if (r.success_rate >= threshold) return r.epoch;
  }
  return std::nullopt;
}

void write_checkpoint(std::ostream& out, const AgentNets& nets) {
  write_params(out, nets.critic);
  write_params(out, nets.actor);
}

}  // namespace gcrl
