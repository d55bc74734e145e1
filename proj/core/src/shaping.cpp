#include "gcrl/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gcrl/errors.hpp"
#include "gcrl/qtable.hpp"

namespace gcrl {

std::string_view to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::zero: return "zero";
    case DistanceKind::arccos: return "arccos";
    case DistanceKind::scaled_euclidean: return "scaled_euclidean";
    case DistanceKind::custom_table: return "custom_table";
  }
  return "?";
}

DistanceKind distance_kind_from_string(std::string_view name) {
  if (name == "zero") return DistanceKind::zero;
  if (name == "arccos") return DistanceKind::arccos;
  if (name == "scaled_euclidean" || name == "euclidean") return DistanceKind::scaled_euclidean;
  if (name == "custom" || name == "custom_table") return DistanceKind::custom_table;
  throw DomainError("unknown distance '" + std::string(name) + "'");
}

void PotentialSpec::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("eta must be positive and finite");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0, 1)");
}

double arccos_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionError("arccos_distance: vectors differ in length");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw DomainError("arccos_distance: zero vector");
  const double cosine = std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
  return std::acos(cosine) / std::numbers::pi;
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionError("euclidean_distance: vectors differ in length");
  double sq = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sq += (u[i] - v[i]) * (u[i] - v[i]);
  return std::sqrt(sq);
}

double vector_distance(DistanceKind kind, std::span<const double> u, std::span<const double> v) {
  switch (kind) {
    case DistanceKind::zero: return 0.0;
    case DistanceKind::arccos: return arccos_distance(u, v);
    case DistanceKind::scaled_euclidean: return euclidean_distance(u, v);
    case DistanceKind::custom_table: break;
  }
  throw UnsupportedError("custom distance tables need a tabular model");
}

double goal_distance(const GoalConditionedMDP& model, StateAction x, std::size_t goal, const PotentialSpec& spec) {
  const std::size_t achieved = model.achieved_goal(x);
  model.check_goal(goal);
  if (spec.distance == DistanceKind::zero) return 0.0;
  if (spec.distance == DistanceKind::custom_table) return model.goal_distance(achieved, goal);
  return vector_distance(spec.distance, model.goal_embedding(achieved), model.goal_embedding(goal));
}

double potential_from_distance(double distance, const PotentialSpec& spec) {
  if (!(distance >= 0.0)) throw DomainError("distance must be nonnegative");
  return -(1.0 - std::pow(spec.gamma, distance / spec.eta)) / (1.0 - spec.gamma);
}

double potential(const GoalConditionedMDP& model, StateAction x, std::size_t goal, const PotentialSpec& spec) {
  return potential_from_distance(goal_distance(model, x, goal, spec), spec);
}

double shaping_bonus(double phi_current, double phi_next, double gamma) { return gamma * phi_next - phi_current; }

double shaping_bonus(const GoalConditionedMDP& model, StateAction x, StateAction x_next, std::size_t goal,
                     const PotentialSpec& spec) {
  return shaping_bonus(potential(model, x, goal, spec), potential(model, x_next, goal, spec), spec.gamma);
}

ValueBounds projection_bounds_from_distance(double distance, const PotentialSpec& spec) {
  if (!(distance >= 0.0)) throw DomainError("distance must be nonnegative");
  return {-std::pow(spec.gamma, distance / spec.eta) / (1.0 - spec.gamma), 0.0};
}

ValueBounds projection_bounds(const GoalConditionedMDP& model, StateAction x, std::size_t goal,
                              const PotentialSpec& spec) {
  return projection_bounds_from_distance(goal_distance(model, x, goal, spec), spec);
}

AdmissibilityReport admissibility_audit(const GoalConditionedMDP& model, const PotentialSpec& spec,
                                        const QTable& qstar, double tolerance) {
  spec.validate();
  qstar.check_shape(model);
  AdmissibilityReport report;
  report.tolerance = tolerance;
  report.worst_gap = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    for (std::size_t a = 0; a < model.num_actions(); ++a) {
      for (std::size_t g = 0; g < model.num_goals(); ++g) {
        const double gap = potential(model, {s, a}, g, spec) - qstar(s, a, g);
        if (gap < report.worst_gap) {
          report.worst_gap = gap;
          report.witness = {{s, a}, g};
        }
      }
    }
  }
  report.holds = report.worst_gap >= -tolerance;
  return report;
}

}  // namespace gcrl
