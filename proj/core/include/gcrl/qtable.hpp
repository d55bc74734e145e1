#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcrl/model.hpp"

namespace gcrl {

enum class QKind { optimal_sparse, optimal_shaped, on_policy, custom };

std::string_view to_string(QKind kind);

/// Value table indexed by (state, action, goal); goals vary fastest.
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t states, std::size_t actions, std::size_t goals, double gamma, QKind kind,
         double fill = 0.0);

  std::size_t num_states() const { return states_; }
  std::size_t num_actions() const { return actions_; }
  std::size_t num_goals() const { return goals_; }
  double gamma() const { return gamma_; }
  QKind kind() const { return kind_; }
  void set_kind(QKind kind) { kind_ = kind; }

  double operator()(std::size_t s, std::size_t a, std::size_t g) const { return values_[index(s, a, g)]; }
  double& operator()(std::size_t s, std::size_t a, std::size_t g) { return values_[index(s, a, g)]; }
  double at(StateAction x, std::size_t g) const;

  /// Values for one state-action, one entry per goal.
  std::span<const double> row(StateAction x) const { return {values_.data() + index(x.state, x.action, 0), goals_}; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const QTable& other) const {
    return states_ == other.states_ && actions_ == other.actions_ && goals_ == other.goals_;
  }
  /// Throws DimensionError unless this table covers exactly the model's (S, A, G).
  void check_shape(const GoalConditionedMDP& model) const;
  void check_same_shape(const QTable& other, std::string_view what) const;

 private:
  std::size_t index(std::size_t s, std::size_t a, std::size_t g) const { return (s * actions_ + a) * goals_ + g; }

  std::size_t states_ = 0, actions_ = 0, goals_ = 0;
  double gamma_ = 0.98;
  QKind kind_ = QKind::custom;
  std::vector<double> values_;
};

/// Largest absolute entrywise difference.
double sup_norm_difference(const QTable& lhs, const QTable& rhs);

/// Goal-conditioned stochastic policy pi(a | s, g).
class TabularPolicy {
 public:
  TabularPolicy() = default;
  TabularPolicy(std::size_t states, std::size_t goals, std::size_t actions);

  std::size_t num_states() const { return states_; }
  std::size_t num_goals() const { return goals_; }
  std::size_t num_actions() const { return actions_; }

  std::span<const double> probs(std::size_t s, std::size_t g) const {
    return {probs_.data() + (s * goals_ + g) * actions_, actions_};
  }
  std::span<double> probs(std::size_t s, std::size_t g) {
    return {probs_.data() + (s * goals_ + g) * actions_, actions_};
  }

  /// Throws PolicyError if any row is not a probability vector (tolerance 1e-9).
  void validate() const;
  void check_shape(const GoalConditionedMDP& model) const;

 private:
  std::size_t states_ = 0, goals_ = 0, actions_ = 0;
  std::vector<double> probs_;
};

/// Deterministic greedy policy; ties go to the lowest action index.
TabularPolicy greedy_policy(const QTable& q);
TabularPolicy uniform_policy(std::size_t states, std::size_t goals, std::size_t actions);
/// (1 - weight) * first + weight * second, row by row.
TabularPolicy mix_policies(const TabularPolicy& first, const TabularPolicy& second, double weight);

// CSV: header "state,action,goal,value", one row per entry in index order.
void write_qtable_csv(std::ostream& out, const QTable& q);
/// Reads a table written by write_qtable_csv (comment lines starting with '#'
/// are skipped). Every (state, action, goal) must appear exactly once.
QTable read_qtable_csv(std::istream& in, double gamma = 0.98);

}  // namespace gcrl
