#include "gcrl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gcrl/errors.hpp"

namespace gcrl {
namespace {

constexpr double kRowTolerance = 1e-12;

void check_distribution(std::span<const double> p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ModelError(what + ": negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kRowTolerance) {
    throw ModelError(what + ": sums to " + std::to_string(sum) + ", expected 1");
  }
}

}  // namespace

GoalConditionedMDP::GoalConditionedMDP(MdpTables tables) : t_(std::move(tables)) {
  const std::size_t S = t_.num_states, A = t_.num_actions, G = t_.num_goals;
  if (S == 0 || A == 0 || G == 0) throw ModelError("model needs at least one state, action and goal");
  if (!(t_.gamma > 0.0 && t_.gamma < 1.0)) throw ModelError("gamma must lie in (0, 1)");
  if (t_.transition.size() != S * A * S) throw ModelError("transition table has wrong size");
  if (t_.achieved.size() != S * A) throw ModelError("achieved-goal table must cover every (state, action)");
  if (t_.rho0.size() != S) throw ModelError("rho0 has wrong length");
  if (t_.rho_goal.size() != G) throw ModelError("rhoG has wrong length");
  check_distribution(t_.rho0, "rho0");
  check_distribution(t_.rho_goal, "rhoG");

  successors_.resize(S * A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      const std::size_t row = s * A + a;
      std::span<const double> p(t_.transition.data() + row * S, S);
      check_distribution(p, "transition row (" + std::to_string(s) + ", " + std::to_string(a) + ")");
      for (std::size_t n = 0; n < S; ++n) {
        if (p[n] > 0.0) successors_[row].push_back({n, p[n]});
      }
      if (t_.achieved[row] >= G) {
        throw ModelError("achieved goal out of range at (" + std::to_string(s) + ", " + std::to_string(a) + ")");
      }
    }
  }

  if (!t_.goal_embedding.empty()) {
    if (t_.goal_embedding.size() != G) throw ModelError("goal embedding must have one vector per goal");
    const std::size_t dim = t_.goal_embedding.front().size();
    if (dim == 0) throw ModelError("goal embedding vectors must be nonempty");
    for (const auto& e : t_.goal_embedding) {
      if (e.size() != dim) throw ModelError("goal embedding vectors differ in length");
      for (double v : e) {
        if (!std::isfinite(v)) throw ModelError("goal embedding has non-finite entry");
      }
    }
  }
  if (!t_.goal_distance.empty()) {
    if (t_.goal_distance.size() != G * G) throw ModelError("goal distance table must be goals x goals");
    for (double d : t_.goal_distance) {
      if (!(d >= 0.0)) throw ModelError("goal distance table has negative entry");
    }
  }
}

void GoalConditionedMDP::check_state(std::size_t state) const {
  if (state >= t_.num_states) throw IndexError("state index " + std::to_string(state) + " out of range");
}

void GoalConditionedMDP::check_state_action(StateAction x) const {
  check_state(x.state);
  if (x.action >= t_.num_actions) throw IndexError("action index " + std::to_string(x.action) + " out of range");
}

void GoalConditionedMDP::check_goal(std::size_t goal) const {
  if (goal >= t_.num_goals) throw IndexError("goal index " + std::to_string(goal) + " out of range");
}

std::span<const double> GoalConditionedMDP::transition_row(StateAction x) const {
  check_state_action(x);
  const std::size_t row = x.state * t_.num_actions + x.action;
  return {t_.transition.data() + row * t_.num_states, t_.num_states};
}

std::span<const Successor> GoalConditionedMDP::successors(StateAction x) const {
  check_state_action(x);
  return successors_[x.state * t_.num_actions + x.action];
}

std::size_t GoalConditionedMDP::achieved_goal(StateAction x) const {
  check_state_action(x);
  return t_.achieved[x.state * t_.num_actions + x.action];
}

std::size_t GoalConditionedMDP::embedding_dim() const {
  return t_.goal_embedding.empty() ? 0 : t_.goal_embedding.front().size();
}

std::span<const double> GoalConditionedMDP::goal_embedding(std::size_t goal) const {
  if (t_.goal_embedding.empty()) throw DomainError("model has no goal embedding");
  check_goal(goal);
  return t_.goal_embedding[goal];
}

double GoalConditionedMDP::goal_distance(std::size_t from_goal, std::size_t to_goal) const {
  if (t_.goal_distance.empty()) throw DomainError("model has no custom goal distance table");
  check_goal(from_goal);
  check_goal(to_goal);
  return t_.goal_distance[from_goal * t_.num_goals + to_goal];
}

GoalConditionedMDP GoalConditionedMDP::with_gamma(double gamma) const {
  MdpTables copy = t_;
  copy.gamma = gamma;
  return GoalConditionedMDP(std::move(copy));
}

double sparse_reward(const GoalConditionedMDP& model, StateAction x, std::size_t goal) {
  model.check_goal(goal);
  return model.achieved_goal(x) == goal ? 0.0 : -1.0;
}

std::size_t achieved_goal(const GoalConditionedMDP& model, StateAction x) {
  return model.achieved_goal(x);
}

std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
  if (probs.empty()) throw DomainError("sample_categorical: empty distribution");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  // u landed in the rounding slack above the final cumulative sum.
  return last_positive;
}

// ---------------------------------------------------------------------------

std::size_t GridLayout::successor(std::size_t cell, GridAction action) const {
  std::size_t x = x_of(cell), y = y_of(cell);
  switch (action) {
    case GridAction::stay: break;
    case GridAction::right: if (x + 1 < width) ++x; break;
    case GridAction::left: if (x > 0) --x; break;
    case GridAction::up: if (y + 1 < height) ++y; break;
    case GridAction::down: if (y > 0) --y; break;
  }
  return this->cell(x, y);
}

GoalConditionedMDP make_gridworld(const GridOptions& options) {
  const GridLayout& grid = options.layout;
  if (grid.width == 0 || grid.height == 0) throw ModelError("gridworld needs positive width and height");
  const std::size_t n = grid.num_cells();

  MdpTables t;
  t.num_states = n;
  t.num_actions = kGridActions;
  t.num_goals = n;
  t.gamma = options.gamma;
  t.transition.assign(n * kGridActions * n, 0.0);
  t.achieved.resize(n * kGridActions);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < kGridActions; ++a) {
      const std::size_t next = grid.successor(s, static_cast<GridAction>(a));
      t.transition[(s * kGridActions + a) * n + next] = 1.0;
      t.achieved[s * kGridActions + a] = next;
    }
  }
  t.rho0.assign(n, 1.0 / static_cast<double>(n));
  t.rho_goal.assign(n, 1.0 / static_cast<double>(n));
  t.goal_embedding.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    t.goal_embedding[c] = {options.origin_x + options.cell_size * static_cast<double>(grid.x_of(c)),
                           options.origin_y + options.cell_size * static_cast<double>(grid.y_of(c))};
  }
  return GoalConditionedMDP(std::move(t));
}

GoalConditionedMDP make_chain(std::size_t length, double gamma) {
  if (length == 0) throw ModelError("chain needs at least one state");
  MdpTables t;
  t.num_states = length;
  t.num_actions = 2;
  t.num_goals = length;
  t.gamma = gamma;
  t.transition.assign(length * 2 * length, 0.0);
  t.achieved.resize(length * 2);
  for (std::size_t s = 0; s < length; ++s) {
    const std::size_t right = std::min(s + 1, length - 1);
    t.transition[(s * 2 + 0) * length + s] = 1.0;
    t.transition[(s * 2 + 1) * length + right] = 1.0;
    t.achieved[s * 2 + 0] = s;
    t.achieved[s * 2 + 1] = right;
  }
  t.rho0.assign(length, 0.0);
  t.rho0[0] = 1.0;
  t.rho_goal.assign(length, 1.0 / static_cast<double>(length));
  t.goal_embedding.resize(length);
  for (std::size_t s = 0; s < length; ++s) t.goal_embedding[s] = {static_cast<double>(s)};
  return GoalConditionedMDP(std::move(t));
}

GoalConditionedMDP make_random_mdp(const RandomMdpOptions& options) {
  const std::size_t S = options.num_states, A = options.num_actions;
  if (S < 2 || A < 1) throw ModelError("random MDP needs >= 2 states and >= 1 action");
  if (!(options.success_prob > 0.0 && options.success_prob <= 1.0)) {
    throw ModelError("success_prob must lie in (0, 1]");
  }
  Rng rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick_state(0, S - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Transition kernel of each target: mass success_prob on the target itself,
  // the rest split evenly over a fixed set of slip states.
  std::vector<std::vector<double>> kernel(S, std::vector<double>(S, 0.0));
  const std::size_t slips = std::min(options.slip_states, S - 1);
  for (std::size_t target = 0; target < S; ++target) {
    kernel[target][target] = options.success_prob;
    if (slips == 0 || options.success_prob == 1.0) {
      kernel[target][target] = 1.0;
      continue;
    }
    std::vector<std::size_t> others;
    for (std::size_t s = 0; s < S; ++s) {
      if (s != target) others.push_back(s);
    }
    std::shuffle(others.begin(), others.end(), rng);
    const double share = (1.0 - options.success_prob) / static_cast<double>(slips);
    for (std::size_t k = 0; k < slips; ++k) kernel[target][others[k]] += share;
    // Renormalise so the row sums to 1 to machine precision.
    const double sum = std::accumulate(kernel[target].begin(), kernel[target].end(), 0.0);
    for (double& p : kernel[target]) p /= sum;
  }

  MdpTables t;
  t.num_states = S;
  t.num_actions = A;
  t.num_goals = S;
  t.gamma = options.gamma;
  t.transition.assign(S * A * S, 0.0);
  t.achieved.resize(S * A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      const std::size_t target = a == 0 ? s : pick_state(rng);
      t.achieved[s * A + a] = target;
      std::copy(kernel[target].begin(), kernel[target].end(), t.transition.begin() + (s * A + a) * S);
    }
  }
  t.rho0.assign(S, 1.0 / static_cast<double>(S));
  t.rho_goal.assign(S, 1.0 / static_cast<double>(S));
  t.goal_embedding.resize(S);
  for (std::size_t g = 0; g < S; ++g) t.goal_embedding[g] = {unit(rng), unit(rng)};
  return GoalConditionedMDP(std::move(t));
}

double max_step_displacement(const GoalConditionedMDP& model) {
  if (!model.has_goal_embedding()) throw DomainError("max_step_displacement needs a goal embedding");
  auto dist = [&](std::size_t g1, std::size_t g2) {
    auto u = model.goal_embedding(g1), v = model.goal_embedding(g2);
    double sq = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) sq += (u[i] - v[i]) * (u[i] - v[i]);
    return std::sqrt(sq);
  };
  double best = 0.0;
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    for (std::size_t a = 0; a < model.num_actions(); ++a) {
      const std::size_t here = model.achieved_goal({s, a});
      for (const Successor& nxt : model.successors({s, a})) {
        for (std::size_t a2 = 0; a2 < model.num_actions(); ++a2) {
          best = std::max(best, dist(here, model.achieved_goal({nxt.state, a2})));
        }
      }
    }
  }
  return best;
}

}  // namespace gcrl
