#pragma once

// DDPG + hindsight relabeling with an MRN critic and optional potential-based
// shaping. Episodes are stored with unshaped rewards; shaping is applied when
// a minibatch is drawn, against whatever goal the sample ends up with.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "gcrl/goal_env.hpp"
#include "gcrl/mrn.hpp"
#include "gcrl/optim.hpp"
#include "gcrl/shaping.hpp"

namespace gcrl {

enum class TrainRewardMode { sparse, dense };

std::string_view to_string(TrainRewardMode mode);
TrainRewardMode train_reward_mode_from_string(std::string_view name);

enum class HerStrategy { future, final };

struct TrainConfig {
  int epochs = 200;
  int episodes_per_epoch = 50;
  /// Gradient steps (critic then actor) after each collected episode.
  int updates_per_episode = 10;
  int batch_size = 128;
  /// Counted in episodes.
  std::size_t buffer_capacity = 10000;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double polyak = 0.95;
  /// Gaussian exploration noise, as a fraction of the action bound.
  double exploration_noise_scale = 0.2;
  /// Probability of replacing the action by a uniform random one.
  double random_action_prob = 0.3;
  double her_ratio = 0.8;
  HerStrategy her_strategy = HerStrategy::future;
  TrainRewardMode reward_mode = TrainRewardMode::sparse;
  /// Used in dense mode and for the clip bound. Its gamma is overwritten by
  /// `gamma` below.
  PotentialSpec shaping;
  double gamma = 0.98;
  bool clip_target = true;
  bool clip_loss = true;
  autograd::ClipGradient clip_gradient = autograd::ClipGradient::hard;
  /// Weight of mean((a / bound)^2) in the actor loss.
  double action_l2 = 0.0;
  int eval_episodes = 20;
  /// Stop after the first epoch whose success rate reaches this value
  /// (0 disables early stopping).
  double stop_at_success = 0.0;
  std::uint64_t seed = 1;

  std::vector<int> critic_hidden{256, 256};
  int latent_dim = 16;
  std::vector<int> head_hidden{256};
  int embed_dim = 16;
  std::vector<int> actor_hidden{256, 256};

  /// Throws DomainError on out-of-range settings.
  void validate() const;
  PotentialSpec potential() const;
};

struct GoalTransition {
  Vec obs;
  Vec action;
  Vec next_obs;
  Vec achieved;
  double reward = -1.0;
  bool done = false;
  Vec goal;
};

/// One rollout. Row t of obs is the observation before step t; obs has one
/// more row than actions, so next_obs(t) == obs(t + 1).
struct EpisodeTrace {
  Matrix obs;       // (T + 1) x obs_dim
  Matrix actions;   // T x action_dim
  Matrix achieved;  // T x goal_dim, M(obs_t, a_t)
  Eigen::VectorXd rewards;
  Vec goal;

  std::size_t length() const { return static_cast<std::size_t>(actions.rows()); }
  GoalTransition transition(std::size_t t) const;
};

class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void store(EpisodeTrace trace);
  std::size_t size() const { return episodes_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return episodes_.empty(); }
  std::size_t stored_total() const { return stored_; }
  const EpisodeTrace& episode(std::size_t i) const;
  Rng& rng() { return rng_; }

 private:
  std::size_t capacity_;
  std::vector<EpisodeTrace> episodes_;
  std::size_t next_ = 0;
  std::size_t stored_ = 0;
  Rng rng_;
};

/// Rolls out the actor with exploration noise until the env reports done.
/// noise_scale multiplies the action bound to give the Gaussian std.
EpisodeTrace collect_episode(GoalEnv& env, const ActorParams& actor, double noise_scale, double random_action_prob,
                             Rng& rng);

/// Substitutes the goal of step `index` with a hindsight goal and recomputes
/// the sparse reward. future: achieved goal of a uniform step in [index, T);
/// final: achieved goal of the last step.
GoalTransition her_relabel(const EpisodeTrace& trace, std::size_t index, HerStrategy strategy, Rng& rng,
                           const GoalEnv& env);

struct SampledBatch {
  Matrix obs, action, next_obs, achieved, goal;
  Eigen::VectorXd reward;  // unshaped
  std::size_t relabeled = 0;

  Eigen::Index size() const { return obs.rows(); }
};

/// Uniform episode, uniform step; relabeled with probability her_ratio.
SampledBatch sample_batch(ReplayBuffer& buffer, std::size_t batch_size, double her_ratio, HerStrategy strategy,
                          const GoalEnv& env);

struct AgentNets {
  MrnParams critic;
  MrnParams critic_target;
  ActorParams actor;
  ActorParams actor_target;

  static AgentNets create(const GoalEnv& env, const TrainConfig& config);
};

struct TargetBreakdown {
  Eigen::VectorXd target;  // after optional clipping
  Eigen::VectorXd reward;  // r, plus F in dense mode
  Eigen::VectorXd lower;   // clip bound per sample
};

/// r (+ F) + gamma * Q_target(s', pi_target(s', g), g), clipped to [lower, 0]
/// when clip_target is set. lower is the shaped bound in dense mode and
/// -1 / (1 - gamma) in sparse mode.
TargetBreakdown compute_targets(const SampledBatch& batch, const AgentNets& nets, const TrainConfig& config,
                                const GoalEnv& env);

/// One Adam/SGD step on the squared TD error. Returns the loss before the step.
double critic_update(const SampledBatch& batch, AgentNets& nets, Optimizer& optimizer, const TrainConfig& config,
                     const GoalEnv& env);

/// Mean Q(s, pi(s, g), g) over the batch, i.e. the objective before the step.
double actor_objective(const SampledBatch& batch, const AgentNets& nets);
/// One step ascending the objective through the frozen critic.
double actor_update(const SampledBatch& batch, AgentNets& nets, Optimizer& optimizer, const TrainConfig& config);

/// target <- polyak * target + (1 - polyak) * online.
void soft_update(std::vector<Matrix*> target, const std::vector<const Matrix*>& online, double polyak);
void soft_update(MrnParams& target, const MrnParams& online, double polyak);
void soft_update(ActorParams& target, const ActorParams& online, double polyak);

/// Fraction of deterministic-actor rollouts whose final step achieves the goal.
double evaluate_success(GoalEnv& env, const ActorParams& actor, int episodes, Rng& rng);

struct CurveRow {
  int epoch = 0;
  double success_rate = 0.0;
  double critic_loss = 0.0;
};

class Trainer {
 public:
  Trainer(const GoalEnv& env, TrainConfig config);

  /// One epoch: collection, updates, soft updates, evaluation.
  CurveRow run_epoch();
  /// Runs up to config.epochs epochs; the callback sees each row as it lands.
  std::vector<CurveRow> train(const std::function<void(const CurveRow&)>& on_epoch = {});

  const AgentNets& nets() const { return nets_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const TrainConfig& config() const { return config_; }
  int epochs_done() const { return epoch_; }

 private:
  std::unique_ptr<GoalEnv> env_;
  std::unique_ptr<GoalEnv> eval_env_;
  TrainConfig config_;
  AgentNets nets_;
  ReplayBuffer buffer_;
  Optimizer critic_opt_;
  Optimizer actor_opt_;
  Rng explore_rng_;
  Rng eval_rng_;
  int epoch_ = 0;
};

std::vector<CurveRow> train(const GoalEnv& env, const TrainConfig& config,
                            const std::function<void(const CurveRow&)>& on_epoch = {});

/// First epoch with success_rate >= threshold, if any.
std::optional<int> epochs_to_threshold(const std::vector<CurveRow>& curve, double threshold);

void write_checkpoint(std::ostream& out, const AgentNets& nets);

}  // namespace gcrl
