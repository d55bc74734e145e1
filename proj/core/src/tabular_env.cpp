#include "gcrl/tabular_env.hpp"

#include "gcrl/errors.hpp"

namespace gcrl {

TabularEnv::TabularEnv(std::shared_ptr<const GoalConditionedMDP> model, EpisodeOptions options)
    : model_(std::move(model)), options_(options) {
  if (!model_) throw ModelError("TabularEnv needs a model");
  if (options_.horizon <= 0) throw ModelError("horizon must be positive");
}

std::pair<std::size_t, std::size_t> TabularEnv::reset(Rng& rng) {
  state_ = sample_categorical(model_->rho0(), rng);
  goal_ = sample_categorical(model_->rho_goal(), rng);
  elapsed_ = 0;
  active_ = true;
  return {state_, goal_};
}

Transition TabularEnv::step(std::size_t action, Rng& rng) {
  if (!active_) throw StateError("step() on an episode that is not running; call reset() first");
  const StateAction x{state_, action};
  Transition tr;
  tr.state = state_;
  tr.action = action;
  tr.goal = goal_;
  tr.achieved = model_->achieved_goal(x);
  tr.reward = sparse_reward(*model_, x, goal_);
  tr.next_state = sample_categorical(model_->transition_row(x), rng);

  ++elapsed_;
  const bool reached = tr.reward == 0.0;
  tr.done = elapsed_ >= options_.horizon || (options_.terminate_on_goal && reached);
  state_ = tr.next_state;
  if (tr.done) active_ = false;
  return tr;
}

}  // namespace gcrl
