#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gcrl/model.hpp"
#include "gcrl/qtable.hpp"
#include "gcrl/shaping.hpp"

namespace gcrl {

struct ValueIterationOptions {
  double tolerance = 1e-12;
  std::size_t max_sweeps = 100000;
};

/// Optimal action values under sparse rewards, by value iteration to a
/// sup-norm residual below options.tolerance. Throws ModelError if the sweep
/// budget runs out first.
QTable solve_qstar(const GoalConditionedMDP& model, const ValueIterationOptions& options = {});

/// L* = log_gamma(1 + (1 - gamma) Q*), the optimal expected number of
/// penalised steps. Entries at the floor -1/(1 - gamma) map to +infinity.
/// Throws DomainError for values outside [-1/(1 - gamma), 0] (slack 1e-9).
std::vector<double> optimal_steps(const QTable& qstar);

/// Q*_F = Q* - phi. Runs the admissibility audit first and throws
/// PreconditionError when phi >= Q* fails.
QTable solve_shaped_qstar(const GoalConditionedMDP& model, const PotentialSpec& spec,
                          double admissibility_tolerance = 1e-9);
QTable solve_shaped_qstar(const GoalConditionedMDP& model, const PotentialSpec& spec, const QTable& qstar,
                          double admissibility_tolerance = 1e-9);

enum class RewardMode { sparse, shaped };

/// Solves the on-policy Bellman equation
///   Q(s,a,g) = R(s,a,g) + gamma * E_{s'~T, a'~pi}[Q(s',a',g)]
/// exactly (one dense linear solve per goal), refined until the residual is
/// below 1e-12. With RewardMode::shaped the reward is R + gamma phi(s',a',g)
/// - phi(s,a,g); spec must then be supplied.
QTable policy_evaluation(const GoalConditionedMDP& model, const TabularPolicy& policy, RewardMode mode,
                         const std::optional<PotentialSpec>& spec = std::nullopt);

/// Largest |Q - (R + gamma E[Q'])| over all entries.
double bellman_residual(const GoalConditionedMDP& model, const TabularPolicy& policy, const QTable& q,
                        RewardMode mode, const std::optional<PotentialSpec>& spec = std::nullopt);

/// E_{s', a'}[Q(s', a', g)] for every (s, a, g).
QTable expected_next_value(const GoalConditionedMDP& model, const TabularPolicy& policy, const QTable& q);

/// Progress Delta(s,a,g) = E_{s',a'}[Q(s',a',g)] - Q(s,a,g).
QTable progress(const GoalConditionedMDP& model, const TabularPolicy& policy, const QTable& q_pi);

struct ProgressReport {
  QTable delta_pi;
  QTable delta_star;
  double gap_min = 0.0;
  double gap_max = 0.0;
  std::optional<double> epsilon;
  bool progressive = false;
};

/// Band test on Delta* - Delta^pi: progressive iff gap_min > 0 and
/// gap_max <= 2 gap_min, in which case epsilon = gap_min.
ProgressReport progress_gap(const QTable& delta_star, const QTable& delta_pi);

}  // namespace gcrl
