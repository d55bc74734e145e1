#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace gcrl {

using Rng = std::mt19937_64;

struct StateAction {
  std::size_t state = 0;
  std::size_t action = 0;

  friend bool operator==(const StateAction&, const StateAction&) = default;
};

/// One nonzero entry of a transition row.
struct Successor {
  std::size_t state;
  double prob;
};

/// Raw tables handed to the GoalConditionedMDP constructor.
struct MdpTables {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::size_t num_goals = 0;
  /// Row-major [state][action][next_state].
  std::vector<double> transition;
  /// Achieved-goal mapping M, indexed [state][action].
  std::vector<std::size_t> achieved;
  double gamma = 0.98;
  std::vector<double> rho0;
  std::vector<double> rho_goal;
  /// Optional, one vector per goal (all the same length).
  std::vector<std::vector<double>> goal_embedding;
  /// Optional custom goal-to-goal distance, row-major [from_goal][to_goal].
  std::vector<double> goal_distance;
};

/// Finite goal-conditioned MDP (S, A, G, T, gamma, rho0, rhoG, M).
///
/// Immutable after construction. The constructor validates every invariant
/// and throws ModelError on violation: rows of T are nonnegative and sum to 1
/// within 1e-12, M is total and maps into the goal set, rho0 / rhoG are
/// probability vectors and 0 < gamma < 1.
class GoalConditionedMDP {
 public:
  explicit GoalConditionedMDP(MdpTables tables);

  std::size_t num_states() const { return t_.num_states; }
  std::size_t num_actions() const { return t_.num_actions; }
  std::size_t num_goals() const { return t_.num_goals; }
  std::size_t num_state_actions() const { return t_.num_states * t_.num_actions; }
  double gamma() const { return t_.gamma; }

  std::span<const double> transition_row(StateAction x) const;
  std::span<const Successor> successors(StateAction x) const;
  std::size_t achieved_goal(StateAction x) const;

  std::span<const double> rho0() const { return t_.rho0; }
  std::span<const double> rho_goal() const { return t_.rho_goal; }

  bool has_goal_embedding() const { return !t_.goal_embedding.empty(); }
  std::size_t embedding_dim() const;
  std::span<const double> goal_embedding(std::size_t goal) const;

  bool has_goal_distance() const { return !t_.goal_distance.empty(); }
  double goal_distance(std::size_t from_goal, std::size_t to_goal) const;

  const MdpTables& tables() const { return t_; }

  /// Copy of this model with a different discount.
  GoalConditionedMDP with_gamma(double gamma) const;

  void check_state_action(StateAction x) const;
  void check_goal(std::size_t goal) const;
  void check_state(std::size_t state) const;

 private:
  MdpTables t_;
  std::vector<std::vector<Successor>> successors_;
};

/// Sparse reward: 0 when M(x) = g, otherwise -1.
double sparse_reward(const GoalConditionedMDP& model, StateAction x, std::size_t goal);

/// M(x), bounds-checked.
std::size_t achieved_goal(const GoalConditionedMDP& model, StateAction x);

/// Inverse-CDF draw from a probability vector.
std::size_t sample_categorical(std::span<const double> probs, Rng& rng);

// ---------------------------------------------------------------------------
// Bundled models
// ---------------------------------------------------------------------------

enum class GridAction : std::size_t { stay = 0, right = 1, left = 2, up = 3, down = 4 };
inline constexpr std::size_t kGridActions = 5;

/// Cell indexing for a width x height grid: cell = x + y * width.
struct GridLayout {
  std::size_t width = 5;
  std::size_t height = 5;

  std::size_t num_cells() const { return width * height; }
  std::size_t cell(std::size_t x, std::size_t y) const { return x + y * width; }
  std::size_t x_of(std::size_t cell) const { return cell % width; }
  std::size_t y_of(std::size_t cell) const { return cell / width; }
  /// Deterministic successor; moves into the border leave the agent in place.
  std::size_t successor(std::size_t cell, GridAction action) const;
};

struct GridOptions {
  GridLayout layout;
  double gamma = 0.98;
  /// Embedding of cell (x, y) is origin + cell_size * (x, y).
  double cell_size = 1.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
};

/// Deterministic multi-goal gridworld. Actions: stay, right, left, up, down.
/// Goals are cells, M(s, a) is the successor cell, rho0 and rhoG are uniform.
GoalConditionedMDP make_gridworld(const GridOptions& options = {});

/// Chain s0 -> s1 -> ... with a self-loop at the last state.
/// Actions: 0 = stay, 1 = right. Goals are states, M(s, a) is the successor.
GoalConditionedMDP make_chain(std::size_t length = 3, double gamma = 0.98);

struct RandomMdpOptions {
  std::size_t num_states = 20;
  std::size_t num_actions = 3;
  /// Probability of landing on the intended target M(s, a).
  double success_prob = 0.7;
  /// Number of slip destinations sharing the remaining mass.
  std::size_t slip_states = 2;
  double gamma = 0.98;
  std::uint64_t seed = 7;
};

/// Random stochastic MDP whose transition row depends on (s, a) only through
/// the intended target M(s, a). Action 0 targets the current state, so M is
/// onto. Goals are states embedded as random points in the unit square.
GoalConditionedMDP make_random_mdp(const RandomMdpOptions& options = {});

/// Largest goal-space displacement between M(x) and M(x') over one step
/// (x' any state-action reachable from x). Dividing distances by this value
/// yields an admissible step-count lower bound.
double max_step_displacement(const GoalConditionedMDP& model);

// ---------------------------------------------------------------------------
// Plain-text model files
// ---------------------------------------------------------------------------

void write_model(std::ostream& out, const GoalConditionedMDP& model);
GoalConditionedMDP read_model(std::istream& in);
void save_model(const std::string& path, const GoalConditionedMDP& model);
GoalConditionedMDP load_model(const std::string& path);

}  // namespace gcrl
