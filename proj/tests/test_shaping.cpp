#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gcrl/errors.hpp"
#include "gcrl/model.hpp"
#include "gcrl/qtable.hpp"
#include "gcrl/shaping.hpp"
#include "gcrl/solver.hpp"

using namespace gcrl;

TEST_CASE("potential closed form") {
  const PotentialSpec spec{DistanceKind::scaled_euclidean, 1.0, 0.9};
  CHECK(potential_from_distance(1.0, spec) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(potential_from_distance(0.0, spec) == 0.0);
  CHECK(potential_from_distance(2.0, {DistanceKind::scaled_euclidean, 2.0, 0.9}) == doctest::Approx(-1.0));
  // far away the potential tends to the floor
  CHECK(potential_from_distance(1e4, spec) == doctest::Approx(-10.0));
}

TEST_CASE("shaping bonus") {
  CHECK(shaping_bonus(-2.0, -1.0, 0.98) == doctest::Approx(1.02).epsilon(1e-14));
  CHECK(shaping_bonus(0.0, 0.0, 0.98) == 0.0);
  const auto chain = make_chain(3, 0.9);
  const PotentialSpec spec{DistanceKind::scaled_euclidean, 1.0, 0.9};
  const double phi0 = potential(chain, {0, 1}, 2, spec), phi1 = potential(chain, {1, 1}, 2, spec);
  CHECK(shaping_bonus(chain, {0, 1}, {1, 1}, 2, spec) == doctest::Approx(0.9 * phi1 - phi0));
}

TEST_CASE("projection bounds") {
  const PotentialSpec spec{DistanceKind::scaled_euclidean, 1.0, 0.9};
  const ValueBounds b = projection_bounds_from_distance(2.0, spec);
  CHECK(b.lower == doctest::Approx(-8.1).epsilon(1e-14));
  CHECK(b.upper == 0.0);
  CHECK(projection_bounds_from_distance(0.0, {DistanceKind::zero, 1.0, 0.98}).lower == doctest::Approx(-50.0));
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS((PotentialSpec{DistanceKind::zero, 0.0, 0.9}.validate()), DomainError);
  CHECK_THROWS_AS((PotentialSpec{DistanceKind::zero, 1.0, 1.0}.validate()), DomainError);
  CHECK(distance_kind_from_string("arccos") == DistanceKind::arccos);
  CHECK(to_string(DistanceKind::custom_table) == "custom_table");
  CHECK_THROWS(distance_kind_from_string("manhattan"));
}

TEST_CASE("distances") {
  const std::vector<double> u{1, 0}, v{0, 1}, w{-1, 0}, z{0, 0};
  CHECK(arccos_distance(u, v) == doctest::Approx(0.5));
  CHECK(arccos_distance(u, w) == doctest::Approx(1.0));
  CHECK(arccos_distance(u, u) == doctest::Approx(0.0));
  CHECK_THROWS_AS(arccos_distance(u, z), DomainError);
  CHECK(euclidean_distance(std::vector<double>{0, 3}, std::vector<double>{4, 0}) == doctest::Approx(5.0));
  CHECK(vector_distance(DistanceKind::zero, u, w) == 0.0);
  CHECK_THROWS_AS(vector_distance(DistanceKind::custom_table, u, v), UnsupportedError);
}

TEST_CASE("distance properties on random vectors") {
  Rng rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> a(3), b(3), c(3);
    for (int k = 0; k < 3; ++k) a[k] = n(rng), b[k] = n(rng), c[k] = n(rng);
    for (DistanceKind k : {DistanceKind::arccos, DistanceKind::scaled_euclidean}) {
      const double ab = vector_distance(k, a, b), bc = vector_distance(k, b, c), ac = vector_distance(k, a, c);
      CHECK(ab >= 0.0);
      CHECK(ab == doctest::Approx(vector_distance(k, b, a)));
      CHECK(ac <= ab + bc + 1e-12);
    }
  }
}

TEST_CASE("custom goal distance table") {
  auto t = make_chain(3, 0.9).tables();
  t.goal_distance = {0, 1, 2, 1, 0, 1, 2, 1, 0};
  const GoalConditionedMDP m(t);
  const PotentialSpec spec{DistanceKind::custom_table, 1.0, 0.9};
  CHECK(goal_distance(m, {0, 1}, 2, spec) == 1.0);
  CHECK(goal_distance(m, {0, 0}, 2, spec) == 2.0);
  CHECK(admissibility_audit(m, spec, solve_qstar(m)).holds);
  CHECK_THROWS(goal_distance(make_chain(3, 0.9), {0, 0}, 2, spec));
}

TEST_CASE("admissibility with eta at the largest step") {
  for (const auto& m : {make_chain(3), make_gridworld(), make_random_mdp()}) {
    const PotentialSpec spec{DistanceKind::scaled_euclidean, max_step_displacement(m), m.gamma()};
    const QTable q = solve_qstar(m);
    const AdmissibilityReport r = admissibility_audit(m, spec, q);
    CHECK(r.holds);
    CHECK(r.worst_gap >= -1e-9);
  }
}

TEST_CASE("inflated distance is caught with a witness") {
  const auto m = make_chain(3, 0.98);
  const PotentialSpec spec{DistanceKind::scaled_euclidean, 0.1, 0.98};  // 10 d
  const QTable q = solve_qstar(m);
  const AdmissibilityReport r = admissibility_audit(m, spec, q);
  CHECK_FALSE(r.holds);
  CHECK(r.worst_gap < 0.0);
  const double gap = potential(m, r.witness.x, r.witness.goal, spec) - q.at(r.witness.x, r.witness.goal);
  CHECK(gap == doctest::Approx(r.worst_gap));
  CHECK_THROWS_AS(solve_shaped_qstar(m, spec, q), PreconditionError);
}

TEST_CASE("zero distance gives zero shaping") {
  const auto m = make_gridworld();
  const PotentialSpec spec{DistanceKind::zero, 1.0, m.gamma()};
  for (std::size_t s = 0; s < 25; ++s)
    for (std::size_t a = 0; a < 5; ++a)
      for (std::size_t g = 0; g < 25; ++g) CHECK(potential(m, {s, a}, g, spec) == 0.0);
  const QTable q = solve_qstar(m);
  CHECK(sup_norm_difference(solve_shaped_qstar(m, spec, q), q) == 0.0);
}
