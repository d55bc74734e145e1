#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gcrl/model.hpp"
#include "gcrl/qtable.hpp"
#include "gcrl/shaping.hpp"
#include "gcrl/solver.hpp"

namespace gcrl {

/// Witness for a triangle check: first leg x1 -> M(x2), second leg x2 -> goal.
struct TriangleWitness {
  StateAction x1;
  StateAction x2;
  std::size_t goal = 0;
};

struct AuditReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  /// max over triples of Q(x1, M(x2)) + Q(x2, g) - Q(x1, g).
  double worst_violation = 0.0;
  TriangleWitness witness;
  double tolerance = 0.0;

  bool passed() const { return violations == 0; }
};

/// Exhaustive goal-level triangle check: for all x1, x2 in S x A and g in G,
///   Q(x1, M(x2)) + Q(x2, g) <= Q(x1, g) + tolerance.
/// The intermediate goal is the image of x2 under M, which also covers the
/// case where goals and state-actions coincide.
AuditReport triangle_audit(const QTable& q, const GoalConditionedMDP& model, double tolerance = 1e-9);

/// Slack of the progressive-policy intermediate bound
///   Q^pi(x1,M(x2)) + Q^pi(x2,g) <= Q*(x1,M(x2)) + Q*(x2,g) - 2 eps gamma / (1 - gamma),
/// minimised over all triples (negative means violated).
double progressive_bound_slack(const QTable& q_pi, const QTable& qstar, const GoalConditionedMDP& model,
                               double epsilon);

/// Per-(state, goal) flag: do the near-argmax action sets of q1 and q2
/// intersect? Sets collect every action within tie_tolerance of the row max.
struct ArgmaxAgreement {
  std::size_t states = 0, goals = 0;
  std::vector<bool> agree;  // [state][goal]
  std::size_t disagreements = 0;

  bool at(std::size_t s, std::size_t g) const { return agree[s * goals + g]; }
  bool all() const { return disagreements == 0; }
};

ArgmaxAgreement greedy_argmax_report(const QTable& q1, const QTable& q2, double tie_tolerance = 1e-9);

struct ProgressiveSearchOptions {
  std::size_t budget = 10000;
  /// Stop once this many progressive policies have been found.
  std::size_t max_found = 3;
  std::uint64_t seed = 1;
};

struct ProgressiveCandidate {
  std::size_t candidate_index = 0;
  double mix_weight = 0.0;
  TabularPolicy policy;
  QTable q_pi;
  ProgressReport report;
};

struct ProgressiveSearchResult {
  std::size_t evaluated = 0;
  std::vector<ProgressiveCandidate> found;
};

/// Rejection sampling over (1 - w) * greedy(Q*) + w * random policies, with
/// w ~ U(0, 1) and Dirichlet(1) random rows. Returns whatever was found
/// within the budget; an empty result is a legitimate outcome.
ProgressiveSearchResult find_progressive_policies(const GoalConditionedMDP& model, const QTable& qstar,
                                                  const ProgressiveSearchOptions& options = {});

struct BoundsReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  /// max over entries of max(lower - Q, Q - upper); <= 0 when all inside.
  double worst_excess = 0.0;
  Triple witness;
  double tolerance = 0.0;

  bool passed() const { return violations == 0; }
};

/// Every entry of a shaped table against [-gamma^(d/eta) / (1 - gamma), 0].
BoundsReport projection_bounds_audit(const QTable& q_shaped, const GoalConditionedMDP& model, const PotentialSpec& spec,
                                     double tolerance = 0.0);

// CSV reports (header row, then one data row).
void write_audit_csv(std::ostream& out, const AuditReport& report);
void write_admissibility_csv(std::ostream& out, const AdmissibilityReport& report);

}  // namespace gcrl
