#include "gcrl/goal_env.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "gcrl/errors.hpp"

namespace gcrl {

GoalConditionedMDP GoalEnv::enumerate_model() const {
  throw UnsupportedError(name() + ": no finite model or discretization declared");
}

namespace {
void check_action(const Vec& action, int dim) {
  if (action.size() != dim) {
    throw DimensionError("action has " + std::to_string(action.size()) + " entries, expected " + std::to_string(dim));
  }
  if (!action.allFinite()) throw DomainError("action has non-finite entries");
}
}  // namespace

// ---- gridworld ----

GridReachEnv::GridReachEnv(GridReachOptions options) : options_(std::move(options)) {
  if (options_.layout.width == 0 || options_.layout.height == 0) throw ModelError("grid needs positive size");
  if (options_.horizon <= 0) throw DomainError("horizon must be positive");
  if (!(options_.gamma > 0.0 && options_.gamma < 1.0)) throw DomainError("gamma must lie in (0, 1)");
}

double GridReachEnv::spacing() const {
  const std::size_t side = std::max(options_.layout.width, options_.layout.height);
  return side > 1 ? 2.0 / static_cast<double>(side - 1) : 1.0;
}

Vec GridReachEnv::cell_coords(std::size_t cell) const {
  const double h = spacing();
  Vec v(2);
  v << -1.0 + h * static_cast<double>(options_.layout.x_of(cell)), -1.0 + h * static_cast<double>(options_.layout.y_of(cell));
  return v;
}

std::size_t GridReachEnv::cell_of(const Vec& coords) const {
  if (coords.size() != 2) throw DimensionError("grid coordinates must be 2-dimensional");
  const double h = spacing();
  auto axis = [h](double c, std::size_t n) {
    const long k = std::lround((c + 1.0) / h);
    return static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(n) - 1));
  };
  return options_.layout.cell(axis(coords[0], options_.layout.width), axis(coords[1], options_.layout.height));
}

GridAction GridReachEnv::snap(const Vec& action) {
  if (action.size() != 2) throw DimensionError("grid actions are 2-dimensional");
  const double ax = std::abs(action[0]), ay = std::abs(action[1]);
  if (std::max(ax, ay) < 0.5) return GridAction::stay;
  if (ax >= ay) return action[0] > 0.0 ? GridAction::right : GridAction::left;
  return action[1] > 0.0 ? GridAction::up : GridAction::down;
}

std::pair<Vec, Vec> GridReachEnv::reset(Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, options_.layout.num_cells() - 1);
  cell_ = pick(rng);
  goal_cell_ = pick(rng);
  elapsed_ = 0;
  active_ = true;
  return {cell_coords(cell_), cell_coords(goal_cell_)};
}

StepResult GridReachEnv::step(const Vec& action, Rng&) {
  if (!active_) throw StateError("gridworld: step() on a finished or unstarted episode");
  check_action(action, 2);
  const std::size_t next = options_.layout.successor(cell_, snap(action));
  cell_ = next;
  ++elapsed_;
  const bool hit = next == goal_cell_;
  const bool done = elapsed_ >= options_.horizon || (options_.terminate_on_goal && hit);
  if (done) active_ = false;
  Vec at = cell_coords(next);
  return {at, at, hit ? 0.0 : -1.0, done};
}

Vec GridReachEnv::achieved_goal(const Vec& obs, const Vec& action) const {
  check_action(action, 2);
  return cell_coords(options_.layout.successor(cell_of(obs), snap(action)));
}

bool GridReachEnv::goal_reached(const Vec& achieved, const Vec& goal) const {
  return cell_of(achieved) == cell_of(goal);
}

double GridReachEnv::step_length() const { return spacing(); }

GoalConditionedMDP GridReachEnv::enumerate_model() const {
  GridOptions grid;
  grid.layout = options_.layout;
  grid.gamma = options_.gamma;
  grid.cell_size = spacing();
  grid.origin_x = -1.0;
  grid.origin_y = -1.0;
  return make_gridworld(grid);
}

// ---- point reach ----

void ContinuousReachOptions::validate() const {
  if (!(max_step > 0.0) || !std::isfinite(max_step)) throw DomainError("max_step must be positive");
  if (!(success_radius > 0.0) || success_radius > 2.0) throw DomainError("success_radius must lie in (0, 2]");
  if (horizon <= 0) throw DomainError("horizon must be positive");
  if (discretization < 0.0) throw DomainError("discretization must be >= 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0, 1)");
}

ContinuousReachEnv::ContinuousReachEnv(ContinuousReachOptions options) : options_(options) { options_.validate(); }

long ContinuousReachEnv::lattice_points() const {
  return static_cast<long>(std::floor(1.0 / options_.success_radius + 1e-9));
}

long ContinuousReachEnv::lattice_index(double coord) const {
  const long k = lattice_points();
  return std::clamp<long>(std::lround(coord / options_.success_radius), -k, k);
}

Vec ContinuousReachEnv::snap_to_lattice(const Vec& point) const {
  if (point.size() != 2) throw DimensionError("point-reach positions are 2-dimensional");
  Vec out(2);
  for (int i = 0; i < 2; ++i) out[i] = static_cast<double>(lattice_index(point[i])) * options_.success_radius;
  return out;
}

Vec ContinuousReachEnv::move(const Vec& position, const Vec& action) const {
  check_action(action, 2);
  if (position.size() != 2) throw DimensionError("point-reach positions are 2-dimensional");
  Vec step = action;
  const double norm = step.norm();
  if (norm > options_.max_step) step *= options_.max_step / norm;
  return (position + step).cwiseMax(-1.0).cwiseMin(1.0);
}

std::pair<Vec, Vec> ContinuousReachEnv::reset(Rng& rng) {
  const long k = lattice_points();
  std::uniform_int_distribution<long> pick(-k, k);
  if (options_.random_start) {
    std::uniform_real_distribution<double> box(-1.0, 1.0);
    const double x = box(rng);
    const double y = box(rng);
    position_ << x, y;
  } else {
    position_.setZero();
  }
  const long gx = pick(rng);
  const long gy = pick(rng);
  goal_ << static_cast<double>(gx) * options_.success_radius, static_cast<double>(gy) * options_.success_radius;
  elapsed_ = 0;
  active_ = true;
  return {position_, goal_};
}

StepResult ContinuousReachEnv::step(const Vec& action, Rng&) {
  if (!active_) throw StateError("point_reach: step() on a finished or unstarted episode");
  position_ = move(position_, action);
  ++elapsed_;
  Vec achieved = snap_to_lattice(position_);
  const bool hit = goal_reached(achieved, goal_);
  const bool done = elapsed_ >= options_.horizon || (options_.terminate_on_goal && hit);
  if (done) active_ = false;
  return {position_, std::move(achieved), hit ? 0.0 : -1.0, done};
}

Vec ContinuousReachEnv::achieved_goal(const Vec& obs, const Vec& action) const {
  return snap_to_lattice(move(obs, action));
}

bool ContinuousReachEnv::goal_reached(const Vec& achieved, const Vec& goal) const {
  if (achieved.size() != 2 || goal.size() != 2) throw DimensionError("point-reach goals are 2-dimensional");
  return lattice_index(achieved[0]) == lattice_index(goal[0]) && lattice_index(achieved[1]) == lattice_index(goal[1]);
}

double ContinuousReachEnv::step_length() const { return options_.max_step + std::sqrt(2.0) * options_.success_radius; }

GoalConditionedMDP ContinuousReachEnv::enumerate_model() const {
  const double h = options_.discretization;
  if (h <= 0.0) throw UnsupportedError("point_reach: no discretization declared");
  const double cells = 2.0 / h;
  if (std::abs(cells - std::round(cells)) > 1e-9) {
    throw DomainError("discretization " + std::to_string(h) + " does not divide [-1, 1]");
  }
  const auto side = static_cast<std::size_t>(std::lround(cells)) + 1;
  GridOptions grid;
  grid.layout = {side, side};
  grid.gamma = options_.gamma;
  grid.cell_size = h;
  grid.origin_x = -1.0;
  grid.origin_y = -1.0;
  return make_gridworld(grid);
}

}  // namespace gcrl
