#include "gcrl/qtable.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

#include "gcrl/errors.hpp"
#include "gcrl/numfmt.hpp"

namespace gcrl {

std::string_view to_string(QKind kind) {
  switch (kind) {
    case QKind::optimal_sparse: return "optimal_sparse";
    case QKind::optimal_shaped: return "optimal_shaped";
    case QKind::on_policy: return "on_policy";
    case QKind::custom: return "custom";
  }
  return "?";
}

QTable::QTable(std::size_t states, std::size_t actions, std::size_t goals, double gamma, QKind kind, double fill)
    : states_(states), actions_(actions), goals_(goals), gamma_(gamma), kind_(kind),
      values_(states * actions * goals, fill) {}

double QTable::at(StateAction x, std::size_t g) const {
  if (x.state >= states_ || x.action >= actions_ || g >= goals_) throw IndexError("QTable index out of range");
  return values_[index(x.state, x.action, g)];
}

void QTable::check_shape(const GoalConditionedMDP& model) const {
  if (states_ != model.num_states() || actions_ != model.num_actions() || goals_ != model.num_goals()) {
    throw DimensionError("value table shape (" + std::to_string(states_) + ", " + std::to_string(actions_) + ", " +
                         std::to_string(goals_) + ") does not match the model");
  }
}

void QTable::check_same_shape(const QTable& other, std::string_view what) const {
  if (!same_shape(other)) throw DimensionError(std::string(what) + ": value tables differ in shape");
}

double sup_norm_difference(const QTable& lhs, const QTable& rhs) {
  lhs.check_same_shape(rhs, "sup_norm_difference");
  double worst = 0.0;
  auto a = lhs.values(), b = rhs.values();
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// ---------------------------------------------------------------------------

TabularPolicy::TabularPolicy(std::size_t states, std::size_t goals, std::size_t actions)
    : states_(states), goals_(goals), actions_(actions), probs_(states * goals * actions, 0.0) {}

void TabularPolicy::validate() const {
  for (std::size_t s = 0; s < states_; ++s) {
    for (std::size_t g = 0; g < goals_; ++g) {
      double sum = 0.0;
      for (double p : probs(s, g)) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw PolicyError("policy row has a negative or non-finite entry");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw PolicyError("policy row (" + std::to_string(s) + ", " + std::to_string(g) + ") sums to " +
                          std::to_string(sum));
      }
    }
  }
}

void TabularPolicy::check_shape(const GoalConditionedMDP& model) const {
  if (states_ != model.num_states() || goals_ != model.num_goals() || actions_ != model.num_actions()) {
    throw DimensionError("policy shape does not match the model");
  }
}

TabularPolicy greedy_policy(const QTable& q) {
  TabularPolicy pi(q.num_states(), q.num_goals(), q.num_actions());
  for (std::size_t s = 0; s < q.num_states(); ++s) {
    for (std::size_t g = 0; g < q.num_goals(); ++g) {
      std::size_t best = 0;
      for (std::size_t a = 1; a < q.num_actions(); ++a) {
        if (q(s, a, g) > q(s, best, g)) best = a;
      }
      pi.probs(s, g)[best] = 1.0;
    }
  }
  return pi;
}

TabularPolicy uniform_policy(std::size_t states, std::size_t goals, std::size_t actions) {
  TabularPolicy pi(states, goals, actions);
  for (std::size_t s = 0; s < states; ++s) {
    for (std::size_t g = 0; g < goals; ++g) {
      auto row = pi.probs(s, g);
      std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(actions));
    }
  }
  return pi;
}

TabularPolicy mix_policies(const TabularPolicy& first, const TabularPolicy& second, double weight) {
  if (first.num_states() != second.num_states() || first.num_goals() != second.num_goals() ||
      first.num_actions() != second.num_actions()) {
    throw DimensionError("mix_policies: shapes differ");
  }
  if (!(weight >= 0.0 && weight <= 1.0)) throw DomainError("mix_policies: weight must lie in [0, 1]");
  TabularPolicy out(first.num_states(), first.num_goals(), first.num_actions());
  for (std::size_t s = 0; s < first.num_states(); ++s) {
    for (std::size_t g = 0; g < first.num_goals(); ++g) {
      auto a = first.probs(s, g), b = second.probs(s, g);
      auto o = out.probs(s, g);
      for (std::size_t k = 0; k < o.size(); ++k) o[k] = (1.0 - weight) * a[k] + weight * b[k];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_qtable_csv(std::ostream& out, const QTable& q) {
  out << "state,action,goal,value\n";
  for (std::size_t s = 0; s < q.num_states(); ++s) {
    for (std::size_t a = 0; a < q.num_actions(); ++a) {
      for (std::size_t g = 0; g < q.num_goals(); ++g) {
        out << s << ',' << a << ',' << g << ',' << format_double(q(s, a, g)) << '\n';
      }
    }
  }
}

QTable read_qtable_csv(std::istream& in, double gamma) {
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> entries;
  std::size_t S = 0, A = 0, G = 0;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "state,action,goal,value") throw ParseError("value table CSV: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 4) throw ParseError("value table CSV line " + std::to_string(line_no) + ": need 4 columns");
    const auto s = static_cast<std::size_t>(parse_int(cells[0]));
    const auto a = static_cast<std::size_t>(parse_int(cells[1]));
    const auto g = static_cast<std::size_t>(parse_int(cells[2]));
    if (!entries.emplace(std::tuple{s, a, g}, parse_double(cells[3])).second) {
      throw ParseError("value table CSV line " + std::to_string(line_no) + ": duplicate entry");
    }
    S = std::max(S, s + 1);
    A = std::max(A, a + 1);
    G = std::max(G, g + 1);
  }
  if (!header_seen || entries.empty()) throw ParseError("value table CSV is empty");
  if (entries.size() != S * A * G) throw ParseError("value table CSV does not cover every (state, action, goal)");
  QTable q(S, A, G, gamma, QKind::custom);
  for (const auto& [key, value] : entries) {
    const auto [s, a, g] = key;
    q(s, a, g) = value;
  }
  return q;
}

}  // namespace gcrl
