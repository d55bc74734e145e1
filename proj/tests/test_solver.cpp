#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gcrl/audit.hpp"
#include "gcrl/errors.hpp"
#include "gcrl/model.hpp"
#include "gcrl/qtable.hpp"
#include "gcrl/solver.hpp"

using namespace gcrl;

namespace {

std::vector<GoalConditionedMDP> bundled() { return {make_chain(3), make_gridworld(), make_random_mdp()}; }

}  // namespace

TEST_CASE("chain optimal values by hand") {
  const auto m = make_chain(3, 0.9);
  const QTable q = solve_qstar(m);
  CHECK(q(0, 1, 2) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(q(0, 1, 1) == doctest::Approx(0.0));
  CHECK(q(0, 0, 2) == doctest::Approx(-1.9).epsilon(1e-12));
  CHECK(q(2, 0, 0) == doctest::Approx(-10.0).epsilon(1e-12));
  const auto steps = optimal_steps(q);
  CHECK(steps[(0 * 2 + 1) * 3 + 2] == doctest::Approx(1.0));
  CHECK(std::isinf(steps[(2 * 2 + 0) * 3 + 0]));
}

TEST_CASE("steps from values") {
  QTable q(1, 1, 1, 0.9, QKind::optimal_sparse, -1.0);
  CHECK(optimal_steps(q)[0] == doctest::Approx(1.0));
  q(0, 0, 0) = -1.9;
  CHECK(optimal_steps(q)[0] == doctest::Approx(2.0));
  q(0, 0, 0) = 1.0;
  CHECK_THROWS_AS(optimal_steps(q), DomainError);
}

TEST_CASE("optimal values stay in range and satisfy Bellman") {
  for (const auto& m : bundled()) {
    const QTable q = solve_qstar(m);
    const double floor = -1.0 / (1.0 - m.gamma());
    for (double v : q.values()) {
      CHECK(v <= 1e-12);
      CHECK(v >= floor - 1e-9);
    }
    CHECK(bellman_residual(m, greedy_policy(q), q, RewardMode::sparse) < 1e-10);
  }
}

TEST_CASE("shaped optimum on the chain") {
  const auto m = make_chain(3, 0.9);
  const PotentialSpec spec{DistanceKind::scaled_euclidean, 1.0, 0.9};
  const QTable q = solve_qstar(m);
  const QTable qf = solve_shaped_qstar(m, spec, q);
  CHECK(qf(0, 1, 2) == doctest::Approx(q(0, 1, 2) - potential(m, {0, 1}, 2, spec)));
  CHECK(qf(0, 1, 2) == doctest::Approx(-1.0 - (-1.0)));
  const QTable eval = policy_evaluation(m, greedy_policy(q), RewardMode::shaped, spec);
  CHECK(sup_norm_difference(qf, eval) < 1e-10);
}

TEST_CASE("shaped identity and bounds on every bundled model") {
  for (const auto& m : bundled()) {
    const PotentialSpec spec{DistanceKind::scaled_euclidean, max_step_displacement(m), m.gamma()};
    const QTable q = solve_qstar(m);
    const QTable qf = solve_shaped_qstar(m, spec, q);
    const QTable eval = policy_evaluation(m, greedy_policy(q), RewardMode::shaped, spec);
    CHECK(sup_norm_difference(qf, eval) < 1e-8);
    CHECK(projection_bounds_audit(qf, m, spec, 1e-9).passed());
  }
}

TEST_CASE("uniform policy is worse than optimal") {
  const auto m = make_chain(3, 0.9);
  const QTable q = solve_qstar(m);
  const QTable qu = policy_evaluation(m, uniform_policy(3, 3, 2), RewardMode::sparse);
  CHECK(qu(0, 0, 2) < q(0, 0, 2));
  CHECK(qu(0, 1, 2) < q(0, 1, 2));
  for (std::size_t i = 0; i < q.values().size(); ++i) CHECK(qu.values()[i] <= q.values()[i] + 1e-12);
  CHECK(bellman_residual(m, uniform_policy(3, 3, 2), qu, RewardMode::sparse) < 1e-12);
}

TEST_CASE("policy evaluation needs a spec for shaped rewards") {
  const auto m = make_chain(3);
  CHECK_THROWS(policy_evaluation(m, uniform_policy(3, 3, 2), RewardMode::shaped));
}

TEST_CASE("progress by hand") {
  const auto m = make_chain(3, 0.9);
  const QTable q = solve_qstar(m);
  const QTable d = progress(m, greedy_policy(q), q);
  CHECK(d(0, 1, 2) == doctest::Approx(1.0));
  CHECK(d(1, 1, 2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("progress gap band") {
  QTable star(1, 1, 2, 0.9, QKind::custom, 1.0), pi(1, 1, 2, 0.9, QKind::custom, 0.0);
  pi(0, 0, 0) = 0.9;
  pi(0, 0, 1) = 0.85;
  ProgressReport r = progress_gap(star, pi);
  CHECK(r.progressive);
  CHECK(*r.epsilon == doctest::Approx(0.1));
  CHECK(r.gap_max == doctest::Approx(0.15));
  pi(0, 0, 1) = 0.7;  // gap 0.3 > 2 * 0.1
  CHECK_FALSE(progress_gap(star, pi).progressive);
  pi(0, 0, 1) = 1.0;  // gap 0
  r = progress_gap(star, pi);
  CHECK_FALSE(r.progressive);
  CHECK_FALSE(r.epsilon.has_value());
}

TEST_CASE("sparse triangle inequality on every bundled model") {
  for (const auto& m : bundled()) {
    const AuditReport r = triangle_audit(solve_qstar(m), m, 1e-9);
    const std::size_t xa = m.num_state_actions();
    CHECK(r.checked == xa * xa * m.num_goals());
    CHECK(r.violations == 0);
  }
}

TEST_CASE("triangle audit finds a planted violation") {
  const auto m = make_chain(3, 0.98);
  QTable q = solve_qstar(m);
  q(0, 0, 2) = -10.0;
  const AuditReport r = triangle_audit(q, m, 1e-9);
  CHECK(r.violations > 0);
  CHECK(r.witness.x1 == StateAction{0, 0});
  CHECK(r.witness.goal == 2);
  const double lhs = q.at(r.witness.x1, m.achieved_goal(r.witness.x2)) + q.at(r.witness.x2, r.witness.goal);
  CHECK(lhs - q.at(r.witness.x1, r.witness.goal) == doctest::Approx(r.worst_violation));
  CHECK(r.worst_violation > r.tolerance);
}

TEST_CASE("argmax agreement") {
  const auto m = make_gridworld();
  const QTable q = solve_qstar(m);
  QTable shifted = q;
  for (double& v : shifted.values()) v += 3.0;
  CHECK(greedy_argmax_report(q, shifted).all());
  const PotentialSpec spec{DistanceKind::scaled_euclidean, 1.0, m.gamma()};
  CHECK(greedy_argmax_report(q, solve_shaped_qstar(m, spec, q)).all());
  QTable flipped = q;
  for (double& v : flipped.values()) v = -v;
  CHECK_FALSE(greedy_argmax_report(q, flipped).all());
}

TEST_CASE("progressive policies on the gridworld") {
  const auto m = make_gridworld();
  const QTable q = solve_qstar(m);
  const auto res = find_progressive_policies(m, q, {10000, 3, 1});
  REQUIRE(!res.found.empty());
  for (const auto& c : res.found) {
    CHECK(c.report.progressive);
    CHECK(c.report.gap_max <= 2 * c.report.gap_min);
    CHECK(triangle_audit(c.q_pi, m, 1e-8).passed());
    CHECK(progressive_bound_slack(c.q_pi, q, m, *c.report.epsilon) >= -1e-8);
  }
  const auto again = find_progressive_policies(m, q, {10000, 3, 1});
  CHECK(again.evaluated == res.evaluated);
}

TEST_CASE("value tables round trip through CSV") {
  const auto m = make_random_mdp();
  const QTable q = solve_qstar(m);
  std::stringstream io;
  write_qtable_csv(io, q);
  const QTable back = read_qtable_csv(io, m.gamma());
  CHECK(sup_norm_difference(q, back) == 0.0);
  std::istringstream missing("state,action,goal,value\n0,0,0,-1\n");
  const QTable partial = read_qtable_csv(missing);
  CHECK_THROWS_AS(partial.check_shape(m), DimensionError);
}

TEST_CASE("policy helpers") {
  TabularPolicy p = uniform_policy(2, 2, 3);
  CHECK_NOTHROW(p.validate());
  p.probs(0, 0)[0] = 0.9;
  CHECK_THROWS_AS(p.validate(), PolicyError);
  const TabularPolicy mix = mix_policies(uniform_policy(2, 2, 3), greedy_policy(QTable(2, 3, 2, 0.9, QKind::custom)), 0.5);
  CHECK(mix.probs(1, 1)[0] == doctest::Approx(0.5 / 3 + 0.5));
}
