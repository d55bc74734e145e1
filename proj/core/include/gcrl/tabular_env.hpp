#pragma once

#include <cstddef>
#include <memory>
#include <utility>

#include "gcrl/model.hpp"

namespace gcrl {

/// One step of experience in a tabular model. Rewards are the unshaped sparse
/// values, so reward is 0 exactly when achieved == goal.
struct Transition {
  std::size_t state = 0;
  std::size_t action = 0;
  std::size_t next_state = 0;
  std::size_t achieved = 0;
  double reward = -1.0;
  bool done = false;
  std::size_t goal = 0;
};

struct EpisodeOptions {
  int horizon = 50;
  /// End the episode on the first zero-reward step. Off by default: the agent
  /// keeps acting after reaching the goal and must learn to hold it.
  bool terminate_on_goal = false;
};

/// Episode driver over a GoalConditionedMDP. The model is shared read-only;
/// the environment owns only the episode cursor.
class TabularEnv {
 public:
  explicit TabularEnv(std::shared_ptr<const GoalConditionedMDP> model, EpisodeOptions options = {});

  /// Samples state ~ rho0 and goal ~ rhoG.
  std::pair<std::size_t, std::size_t> reset(Rng& rng);
  /// Throws StateError before reset() or after the episode has finished.
  Transition step(std::size_t action, Rng& rng);

  bool finished() const { return !active_; }
  int elapsed() const { return elapsed_; }
  std::size_t state() const { return state_; }
  std::size_t goal() const { return goal_; }

  const GoalConditionedMDP& model() const { return *model_; }
  const EpisodeOptions& options() const { return options_; }

  /// Exact finite model for the solvers.
  const GoalConditionedMDP& enumerate_model() const { return *model_; }

 private:
  std::shared_ptr<const GoalConditionedMDP> model_;
  EpisodeOptions options_;
  std::size_t state_ = 0;
  std::size_t goal_ = 0;
  int elapsed_ = 0;
  bool active_ = false;
};

}  // namespace gcrl
