#pragma once

// Vector-valued goal environments for the learning agent.
//
// Observations, goals and actions are real vectors. The achieved goal of a
// step is a pure function of (observation, action), so the agent can
// recompute it for any counterfactual action when shaping.

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>

#include "gcrl/model.hpp"

namespace gcrl {

using Vec = Eigen::VectorXd;

struct StepResult {
  Vec next_obs;
  Vec achieved;   // M(obs, action)
  double reward;  // 0 or -1
  bool done;
};

class GoalEnv {
 public:
  virtual ~GoalEnv() = default;

  virtual std::string name() const = 0;
  virtual int obs_dim() const = 0;
  virtual int goal_dim() const = 0;
  virtual int action_dim() const = 0;
  /// Actions are expected in [-action_bound, action_bound] per coordinate.
  virtual double action_bound() const = 0;
  virtual int horizon() const = 0;

  /// Starts an episode; returns (observation, goal).
  virtual std::pair<Vec, Vec> reset(Rng& rng) = 0;
  /// Throws StateError before reset() or once the horizon is used up.
  virtual StepResult step(const Vec& action, Rng& rng) = 0;

  virtual Vec achieved_goal(const Vec& obs, const Vec& action) const = 0;
  virtual bool goal_reached(const Vec& achieved, const Vec& goal) const = 0;
  double reward(const Vec& achieved, const Vec& goal) const { return goal_reached(achieved, goal) ? 0.0 : -1.0; }

  /// Largest goal-space move of the achieved goal per step (a safe eta).
  virtual double step_length() const = 0;

  virtual std::unique_ptr<GoalEnv> clone() const = 0;

  /// Exact or discretized finite model. Throws UnsupportedError when the
  /// environment declares none.
  virtual GoalConditionedMDP enumerate_model() const;
};

// 5x5-style gridworld driven by continuous actions. Positions and goals are
// cell coordinates mapped to [-1, 1]. An action snaps to "stay" when every
// coordinate is below 0.5 in magnitude, otherwise to a unit move along its
// dominant axis (first axis on ties).
struct GridReachOptions {
  GridLayout layout;
  int horizon = 20;
  double gamma = 0.98;
  bool terminate_on_goal = false;
};

class GridReachEnv final : public GoalEnv {
 public:
  explicit GridReachEnv(GridReachOptions options = {});

  std::string name() const override { return "gridworld"; }
  int obs_dim() const override { return 2; }
  int goal_dim() const override { return 2; }
  int action_dim() const override { return 2; }
  double action_bound() const override { return 1.0; }
  int horizon() const override { return options_.horizon; }

  std::pair<Vec, Vec> reset(Rng& rng) override;
  StepResult step(const Vec& action, Rng& rng) override;
  Vec achieved_goal(const Vec& obs, const Vec& action) const override;
  bool goal_reached(const Vec& achieved, const Vec& goal) const override;
  double step_length() const override;
  std::unique_ptr<GoalEnv> clone() const override { return std::make_unique<GridReachEnv>(*this); }
  GoalConditionedMDP enumerate_model() const override;

  static GridAction snap(const Vec& action);
  Vec cell_coords(std::size_t cell) const;
  std::size_t cell_of(const Vec& coords) const;
  const GridReachOptions& options() const { return options_; }

 private:
  double spacing() const;

  GridReachOptions options_;
  std::size_t cell_ = 0;
  std::size_t goal_cell_ = 0;
  int elapsed_ = 0;
  bool active_ = false;
};

// Point mass in [-1, 1]^2. The action is a displacement rescaled to norm at
// most max_step; the position is clamped to the box. Goals lie on a lattice of
// spacing success_radius, and the achieved goal is the next position rounded
// to that lattice, so success means landing in the goal's lattice cell.
struct ContinuousReachOptions {
  double max_step = 0.2;
  double success_radius = 0.1;
  int horizon = 50;
  bool random_start = true;
  bool terminate_on_goal = false;
  /// Grid resolution for enumerate_model(); 0 means none declared.
  double discretization = 0.0;
  double gamma = 0.98;

  void validate() const;
};

class ContinuousReachEnv final : public GoalEnv {
 public:
  explicit ContinuousReachEnv(ContinuousReachOptions options = {});

  std::string name() const override { return "point_reach"; }
  int obs_dim() const override { return 2; }
  int goal_dim() const override { return 2; }
  int action_dim() const override { return 2; }
  double action_bound() const override { return options_.max_step; }
  int horizon() const override { return options_.horizon; }

  std::pair<Vec, Vec> reset(Rng& rng) override;
  StepResult step(const Vec& action, Rng& rng) override;
  Vec achieved_goal(const Vec& obs, const Vec& action) const override;
  bool goal_reached(const Vec& achieved, const Vec& goal) const override;
  double step_length() const override;
  std::unique_ptr<GoalEnv> clone() const override { return std::make_unique<ContinuousReachEnv>(*this); }
  /// 9x9 grid for resolution 0.25: one state per lattice point, moves of one
  /// grid cell plus "stay", goals embedded at the lattice coordinates.
  GoalConditionedMDP enumerate_model() const override;

  /// Position after applying the clamped displacement.
  Vec move(const Vec& position, const Vec& action) const;
  Vec snap_to_lattice(const Vec& point) const;
  const Vec& position() const { return position_; }
  const Vec& goal() const { return goal_; }
  const ContinuousReachOptions& options() const { return options_; }

 private:
  long lattice_index(double coord) const;
  long lattice_points() const;

  ContinuousReachOptions options_;
  Vec position_ = Vec::Zero(2);
  Vec goal_ = Vec::Zero(2);
  int elapsed_ = 0;
  bool active_ = false;
};

}  // namespace gcrl
