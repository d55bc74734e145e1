#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "gcrl/model.hpp"

namespace gcrl {

class QTable;

/// Distance d between an achieved goal M(s, a) and a target goal.
enum class DistanceKind {
  zero,              ///< d = 0, so phi = 0 and shaping vanishes
  arccos,            ///< angle between embedding vectors, divided by pi
  scaled_euclidean,  ///< Euclidean distance between embeddings (scaled by 1/eta in phi)
  custom_table,      ///< model-supplied goal-to-goal table
};

std::string_view to_string(DistanceKind kind);
DistanceKind distance_kind_from_string(std::string_view name);

/// Potential phi(s, a, g) = -(1 - gamma^(d / eta)) / (1 - gamma).
struct PotentialSpec {
  DistanceKind distance = DistanceKind::scaled_euclidean;
  /// Action atomicity: goal-space distance covered per time step.
  double eta = 1.0;
  double gamma = 0.98;

  /// Throws DomainError unless eta > 0 and 0 < gamma < 1.
  void validate() const;
};

/// arccos(u.v / (|u||v|)) / pi, in [0, 1]. Throws DomainError on a zero vector.
double arccos_distance(std::span<const double> u, std::span<const double> v);
double euclidean_distance(std::span<const double> u, std::span<const double> v);

/// Distance between two goal-space vectors. custom_table is not defined on
/// raw vectors and throws UnsupportedError.
double vector_distance(DistanceKind kind, std::span<const double> u, std::span<const double> v);

/// d(x, g) on a tabular model, measured from M(x) to g.
double goal_distance(const GoalConditionedMDP& model, StateAction x, std::size_t goal, const PotentialSpec& spec);

double potential_from_distance(double distance, const PotentialSpec& spec);
double potential(const GoalConditionedMDP& model, StateAction x, std::size_t goal, const PotentialSpec& spec);

/// Shaping term F = gamma * phi(x', g) - phi(x, g).
double shaping_bonus(double phi_current, double phi_next, double gamma);
double shaping_bonus(const GoalConditionedMDP& model, StateAction x, StateAction x_next, std::size_t goal,
                     const PotentialSpec& spec);

/// Interval the shaped optimal value must lie in: [-gamma^(d/eta) / (1 - gamma), 0].
struct ValueBounds {
  double lower;
  double upper;
};

ValueBounds projection_bounds_from_distance(double distance, const PotentialSpec& spec);
ValueBounds projection_bounds(const GoalConditionedMDP& model, StateAction x, std::size_t goal,
                              const PotentialSpec& spec);

struct Triple {
  StateAction x;
  std::size_t goal = 0;
};

struct AdmissibilityReport {
  bool holds = true;
  /// min over (s, a, g) of phi(s, a, g) - Q*(s, a, g).
  double worst_gap = 0.0;
  Triple witness;
  double tolerance = 0.0;
};

/// Exhaustive check of phi >= Q* - tolerance over every (s, a, g).
/// Throws DimensionError if qstar does not match the model's shape.
AdmissibilityReport admissibility_audit(const GoalConditionedMDP& model, const PotentialSpec& spec,
                                        const QTable& qstar, double tolerance = 1e-9);

}  // namespace gcrl
