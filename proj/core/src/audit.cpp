#include "gcrl/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "gcrl/errors.hpp"
#include "gcrl/numfmt.hpp"

namespace gcrl {

AuditReport triangle_audit(const QTable& q, const GoalConditionedMDP& model, double tolerance) {
  q.check_shape(model);
  const std::size_t S = model.num_states(), A = model.num_actions(), G = model.num_goals();
  AuditReport report;
  report.tolerance = tolerance;
  report.worst_violation = -std::numeric_limits<double>::infinity();

  for (std::size_t s1 = 0; s1 < S; ++s1) {
    for (std::size_t a1 = 0; a1 < A; ++a1) {
      const auto from_x1 = q.row({s1, a1});
      for (std::size_t s2 = 0; s2 < S; ++s2) {
        for (std::size_t a2 = 0; a2 < A; ++a2) {
          const double first_leg = from_x1[model.achieved_goal({s2, a2})];
          const auto from_x2 = q.row({s2, a2});
          for (std::size_t g = 0; g < G; ++g) {
            const double excess = first_leg + from_x2[g] - from_x1[g];
            if (excess > report.worst_violation) {
              report.worst_violation = excess;
              report.witness = {{s1, a1}, {s2, a2}, g};
            }
            if (excess > tolerance) ++report.violations;
          }
        }
      }
    }
  }
  report.checked = S * A * S * A * G;
  return report;
}

double progressive_bound_slack(const QTable& q_pi, const QTable& qstar, const GoalConditionedMDP& model,
                               double epsilon) {
  q_pi.check_shape(model);
  qstar.check_shape(model);
  const std::size_t S = model.num_states(), A = model.num_actions(), G = model.num_goals();
  const double gamma = model.gamma();
  const double offset = 2.0 * epsilon * gamma / (1.0 - gamma);
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t s1 = 0; s1 < S; ++s1) {
    for (std::size_t a1 = 0; a1 < A; ++a1) {
      for (std::size_t s2 = 0; s2 < S; ++s2) {
        for (std::size_t a2 = 0; a2 < A; ++a2) {
          const std::size_t mid = model.achieved_goal({s2, a2});
          for (std::size_t g = 0; g < G; ++g) {
            const double lhs = q_pi(s1, a1, mid) + q_pi(s2, a2, g);
            const double rhs = qstar(s1, a1, mid) + qstar(s2, a2, g) - offset;
            slack = std::min(slack, rhs - lhs);
          }
        }
      }
    }
  }
  return slack;
}

ArgmaxAgreement greedy_argmax_report(const QTable& q1, const QTable& q2, double tie_tolerance) {
  q1.check_same_shape(q2, "greedy_argmax_report");
  ArgmaxAgreement out;
  out.states = q1.num_states();
  out.goals = q1.num_goals();
  out.agree.assign(out.states * out.goals, false);
  const std::size_t A = q1.num_actions();
  for (std::size_t s = 0; s < out.states; ++s) {
    for (std::size_t g = 0; g < out.goals; ++g) {
      double best1 = -std::numeric_limits<double>::infinity(), best2 = best1;
      for (std::size_t a = 0; a < A; ++a) {
        best1 = std::max(best1, q1(s, a, g));
        best2 = std::max(best2, q2(s, a, g));
      }
      bool shared = false;
      for (std::size_t a = 0; a < A && !shared; ++a) {
        shared = q1(s, a, g) >= best1 - tie_tolerance && q2(s, a, g) >= best2 - tie_tolerance;
      }
      out.agree[s * out.goals + g] = shared;
      if (!shared) ++out.disagreements;
    }
  }
  return out;
}

ProgressiveSearchResult find_progressive_policies(const GoalConditionedMDP& model, const QTable& qstar,
                                                  const ProgressiveSearchOptions& options) {
  qstar.check_shape(model);
  const std::size_t S = model.num_states(), A = model.num_actions(), G = model.num_goals();
  const TabularPolicy greedy = greedy_policy(qstar);
  const QTable delta_star = progress(model, greedy, qstar);

  Rng rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);

  ProgressiveSearchResult result;
  for (std::size_t k = 0; k < options.budget && result.found.size() < options.max_found; ++k) {
    const double weight = unit(rng);
    TabularPolicy random(S, G, A);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t g = 0; g < G; ++g) {
        auto row = random.probs(s, g);
        double sum = 0.0;
        for (double& p : row) sum += (p = expo(rng));
        for (double& p : row) p /= sum;
      }
    }
    TabularPolicy candidate = mix_policies(greedy, random, weight);
    QTable q_pi = policy_evaluation(model, candidate, RewardMode::sparse);
    ProgressReport report = progress_gap(delta_star, progress(model, candidate, q_pi));
    ++result.evaluated;
    if (report.progressive) {
      result.found.push_back({k, weight, std::move(candidate), std::move(q_pi), std::move(report)});
    }
  }
  return result;
}

BoundsReport projection_bounds_audit(const QTable& q_shaped, const GoalConditionedMDP& model, const PotentialSpec& spec,
                                     double tolerance) {
  q_shaped.check_shape(model);
  BoundsReport report;
  report.tolerance = tolerance;
  report.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    for (std::size_t a = 0; a < model.num_actions(); ++a) {
      for (std::size_t g = 0; g < model.num_goals(); ++g) {
        const ValueBounds b = projection_bounds(model, {s, a}, g, spec);
        const double q = q_shaped(s, a, g);
        const double excess = std::max(b.lower - q, q - b.upper);
        if (excess > report.worst_excess) {
          report.worst_excess = excess;
          report.witness = {{s, a}, g};
        }
        if (excess > tolerance) ++report.violations;
        ++report.checked;
      }
    }
  }
  return report;
}

void write_audit_csv(std::ostream& out, const AuditReport& r) {
  out << "checked,violations,worst_violation,tolerance,x1_state,x1_action,x2_state,x2_action,goal\n";
  out << r.checked << ',' << r.violations << ',' << format_double(r.worst_violation) << ','
      << format_double(r.tolerance) << ',' << r.witness.x1.state << ',' << r.witness.x1.action << ','
      << r.witness.x2.state << ',' << r.witness.x2.action << ',' << r.witness.goal << '\n';
}

void write_admissibility_csv(std::ostream& out, const AdmissibilityReport& r) {
  out << "holds,worst_gap,tolerance,state,action,goal\n";
  out << (r.holds ? 1 : 0) << ',' << format_double(r.worst_gap) << ',' << format_double(r.tolerance) << ','
      << r.witness.x.state << ',' << r.witness.x.action << ',' << r.witness.goal << '\n';
}

}  // namespace gcrl
