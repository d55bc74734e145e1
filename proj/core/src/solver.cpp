#include "gcrl/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gcrl/errors.hpp"

namespace gcrl {

QTable solve_qstar(const GoalConditionedMDP& model, const ValueIterationOptions& options) {
  const std::size_t S = model.num_states(), A = model.num_actions(), G = model.num_goals();
  const double gamma = model.gamma();
  QTable q(S, A, G, gamma, QKind::optimal_sparse, 0.0);
  std::vector<double> v(S * G, 0.0);  // V(s, g) = max_a Q(s, a, g)

  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double residual = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        const StateAction x{s, a};
        const std::size_t reached = model.achieved_goal(x);
        const auto next = model.successors(x);
        for (std::size_t g = 0; g < G; ++g) {
          double expected = 0.0;
          for (const Successor& n : next) expected += n.prob * v[n.state * G + g];
          const double updated = (reached == g ? 0.0 : -1.0) + gamma * expected;
          residual = std::max(residual, std::abs(updated - q(s, a, g)));
          q(s, a, g) = updated;
        }
      }
    }
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t g = 0; g < G; ++g) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < A; ++a) best = std::max(best, q(s, a, g));
        v[s * G + g] = best;
      }
    }
    if (residual < options.tolerance) return q;
  }
  throw ModelError("value iteration did not converge within " + std::to_string(options.max_sweeps) + " sweeps");
}

std::vector<double> optimal_steps(const QTable& qstar) {
  if (qstar.kind() != QKind::optimal_sparse) throw DomainError("optimal_steps needs an optimal sparse value table");
  const double gamma = qstar.gamma();
  const double floor = -1.0 / (1.0 - gamma);
  constexpr double kSlack = 1e-9;
  std::vector<double> steps;
  steps.reserve(qstar.values().size());
  for (double q : qstar.values()) {
    if (q > kSlack || q < floor - kSlack) {
      throw DomainError("value " + std::to_string(q) + " outside [-1/(1-gamma), 0]");
    }
    const double base = 1.0 + (1.0 - gamma) * std::min(q, 0.0);
    // Within the slack of the floor the goal is never reached.
    if (base <= (1.0 - gamma) * kSlack) {
      steps.push_back(std::numeric_limits<double>::infinity());
    } else {
      steps.push_back(std::log(base) / std::log(gamma));
    }
  }
  return steps;
}

QTable solve_shaped_qstar(const GoalConditionedMDP& model, const PotentialSpec& spec,
                          double admissibility_tolerance) {
  return solve_shaped_qstar(model, spec, solve_qstar(model), admissibility_tolerance);
}

QTable solve_shaped_qstar(const GoalConditionedMDP& model, const PotentialSpec& spec, const QTable& qstar,
                          double admissibility_tolerance) {
  const AdmissibilityReport adm = admissibility_audit(model, spec, qstar, admissibility_tolerance);
  if (!adm.holds) {
    throw PreconditionError("potential is not admissible: phi - Q* = " + std::to_string(adm.worst_gap) +
                            " at (s=" + std::to_string(adm.witness.x.state) + ", a=" +
                            std::to_string(adm.witness.x.action) + ", g=" + std::to_string(adm.witness.goal) + ")");
  }
  QTable shaped = qstar;
  shaped.set_kind(QKind::optimal_shaped);
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    for (std::size_t a = 0; a < model.num_actions(); ++a) {
      for (std::size_t g = 0; g < model.num_goals(); ++g) shaped(s, a, g) -= potential(model, {s, a}, g, spec);
    }
  }
  return shaped;
}

namespace {

// Reward decomposition shared by the sparse and shaped evaluators:
//   Q(s,a,g) = c(s,a,g) + gamma * sum_{s'} T(s'|s,a) U(s',g)
//   U(s,g)   = sum_a pi(a|s,g) [b(s,a,g) + Q(s,a,g)]
// Sparse: c = R, b = 0. Shaped: c = R - phi, b = phi (the gamma*phi(s',a')
// term of F is folded into U).
struct RewardTerms {
  std::vector<double> c;  // [s][a][g]
  std::vector<double> b;  // [s][a][g]
};

RewardTerms reward_terms(const GoalConditionedMDP& model, RewardMode mode, const std::optional<PotentialSpec>& spec) {
  const std::size_t S = model.num_states(), A = model.num_actions(), G = model.num_goals();
  RewardTerms terms{std::vector<double>(S * A * G), std::vector<double>(S * A * G, 0.0)};
  if (mode == RewardMode::shaped) {
    if (!spec) throw DomainError("shaped policy evaluation needs a PotentialSpec");
    spec->validate();
  }
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t g = 0; g < G; ++g) {
        const std::size_t i = (s * A + a) * G + g;
        terms.c[i] = sparse_reward(model, {s, a}, g);
        if (mode == RewardMode::shaped) {
          const double phi = potential(model, {s, a}, g, *spec);
          terms.c[i] -= phi;
          terms.b[i] = phi;
        }
      }
    }
  }
  return terms;
}

}  // namespace

QTable policy_evaluation(const GoalConditionedMDP& model, const TabularPolicy& policy, RewardMode mode,
                         const std::optional<PotentialSpec>& spec) {
  policy.check_shape(model);
  policy.validate();
  const std::size_t S = model.num_states(), A = model.num_actions(), G = model.num_goals();
  const double gamma = model.gamma();
  const RewardTerms terms = reward_terms(model, mode, spec);
  QTable q(S, A, G, gamma, QKind::on_policy, 0.0);

  Eigen::MatrixXd system(S, S);
  Eigen::VectorXd rhs(S);
  for (std::size_t g = 0; g < G; ++g) {
    // U = r_pi + gamma P_pi U, with P_pi(s, s') = sum_a pi(a|s) T(s'|s,a).
    system.setIdentity();
    rhs.setZero();
    for (std::size_t s = 0; s < S; ++s) {
      auto pi = policy.probs(s, g);
      for (std::size_t a = 0; a < A; ++a) {
        if (pi[a] == 0.0) continue;
        const std::size_t i = (s * A + a) * G + g;
        rhs[s] += pi[a] * (terms.b[i] + terms.c[i]);
        for (const Successor& n : model.successors({s, a})) system(s, n.state) -= gamma * pi[a] * n.prob;
      }
    }
    const auto lu = system.partialPivLu();
    Eigen::VectorXd u = lu.solve(rhs);
    // Iterative refinement keeps the residual at machine level for the audits.
    for (int pass = 0; pass < 3; ++pass) {
      const Eigen::VectorXd r = rhs - system * u;
      if (r.lpNorm<Eigen::Infinity>() < 1e-14) break;
      u += lu.solve(r);
    }
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        double expected = 0.0;
        for (const Successor& n : model.successors({s, a})) expected += n.prob * u[n.state];
        q(s, a, g) = terms.c[(s * A + a) * G + g] + gamma * expected;
      }
    }
  }

  const double residual = bellman_residual(model, policy, q, mode, spec);
  if (residual >= 1e-12) {
    throw ModelError("policy evaluation residual " + std::to_string(residual) + " above 1e-12");
  }
  return q;
}

double bellman_residual(const GoalConditionedMDP& model, const TabularPolicy& policy, const QTable& q,
                        RewardMode mode, const std::optional<PotentialSpec>& spec) {
  q.check_shape(model);
  const std::size_t S = model.num_states(), A = model.num_actions(), G = model.num_goals();
  const RewardTerms terms = reward_terms(model, mode, spec);
  double worst = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t g = 0; g < G; ++g) {
        double expected = 0.0;
        for (const Successor& n : model.successors({s, a})) {
          auto pi = policy.probs(n.state, g);
          for (std::size_t a2 = 0; a2 < A; ++a2) {
            if (pi[a2] == 0.0) continue;
            const std::size_t j = (n.state * A + a2) * G + g;
            expected += n.prob * pi[a2] * (terms.b[j] + q(n.state, a2, g));
          }
        }
        const double target = terms.c[(s * A + a) * G + g] + model.gamma() * expected;
        worst = std::max(worst, std::abs(q(s, a, g) - target));
      }
    }
  }
  return worst;
}

QTable expected_next_value(const GoalConditionedMDP& model, const TabularPolicy& policy, const QTable& q) {
  q.check_shape(model);
  policy.check_shape(model);
  const std::size_t S = model.num_states(), A = model.num_actions(), G = model.num_goals();
  QTable out(S, A, G, q.gamma(), QKind::custom, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t g = 0; g < G; ++g) {
        double expected = 0.0;
        for (const Successor& n : model.successors({s, a})) {
          auto pi = policy.probs(n.state, g);
          for (std::size_t a2 = 0; a2 < A; ++a2) expected += n.prob * pi[a2] * q(n.state, a2, g);
        }
        out(s, a, g) = expected;
      }
    }
  }
  return out;
}

QTable progress(const GoalConditionedMDP& model, const TabularPolicy& policy, const QTable& q_pi) {
  QTable delta = expected_next_value(model, policy, q_pi);
  auto d = delta.values();
  auto q = q_pi.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= q[i];
  return delta;
}

ProgressReport progress_gap(const QTable& delta_star, const QTable& delta_pi) {
  delta_star.check_same_shape(delta_pi, "progress_gap");
  ProgressReport report;
  report.delta_pi = delta_pi;
  report.delta_star = delta_star;
  report.gap_min = std::numeric_limits<double>::infinity();
  report.gap_max = -std::numeric_limits<double>::infinity();
  auto ds = delta_star.values(), dp = delta_pi.values();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double gap = ds[i] - dp[i];
    report.gap_min = std::min(report.gap_min, gap);
    report.gap_max = std::max(report.gap_max, gap);
  }
  report.progressive = report.gap_min > 0.0 && report.gap_max <= 2.0 * report.gap_min;
  if (report.progressive) report.epsilon = report.gap_min;
  return report;
}

}  // namespace gcrl
