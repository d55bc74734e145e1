#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gcrl/errors.hpp"
#include "gcrl/goal_env.hpp"
#include "gcrl/model.hpp"
#include "gcrl/tabular_env.hpp"

using namespace gcrl;

namespace {

MdpTables coin_tables() {
  MdpTables t;
  t.num_states = 2;
  t.num_actions = 1;
  t.num_goals = 2;
  t.transition = {0.5, 0.5, 0.5, 0.5};
  t.achieved = {0, 1};
  t.gamma = 0.9;
  t.rho0 = {1.0, 0.0};
  t.rho_goal = {0.5, 0.5};
  return t;
}

}  // namespace

TEST_CASE("sparse reward is 0 on the achieved goal and -1 elsewhere") {
  const auto chain = make_chain(3, 0.9);
  CHECK(sparse_reward(chain, {0, 1}, 1) == 0.0);
  CHECK(sparse_reward(chain, {0, 1}, 2) == -1.0);
  CHECK(sparse_reward(chain, {2, 0}, 2) == 0.0);
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t g = 0; g < 3; ++g) {
        const double r = sparse_reward(chain, {s, a}, g);
        CHECK((r == 0.0) == (achieved_goal(chain, {s, a}) == g));
      }
}

TEST_CASE("chain transition tensor matches the hand table") {
  const auto m = make_chain(3, 0.98);
  // [state][action] -> next state; stay = 0, right = 1
  const std::size_t next[3][2] = {{0, 1}, {1, 2}, {2, 2}};
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t a = 0; a < 2; ++a) {
      const auto row = m.transition_row({s, a});
      for (std::size_t s2 = 0; s2 < 3; ++s2) CHECK(row[s2] == (s2 == next[s][a] ? 1.0 : 0.0));
      CHECK(m.achieved_goal({s, a}) == next[s][a]);
    }
  }
  CHECK(m.rho0()[0] == 1.0);
}

TEST_CASE("model validation") {
  SUBCASE("row not summing to one") {
    auto t = coin_tables();
    t.transition[1] = 0.4;
    CHECK_THROWS_AS(GoalConditionedMDP{t}, ModelError);
  }
  SUBCASE("negative probability") {
    auto t = coin_tables();
    t.transition = {1.5, -0.5, 0.5, 0.5};
    CHECK_THROWS_AS(GoalConditionedMDP{t}, ModelError);
  }
  SUBCASE("achieved goal outside the goal set") {
    auto t = coin_tables();
    t.achieved[1] = 2;
    CHECK_THROWS_AS(GoalConditionedMDP{t}, ModelError);
  }
  SUBCASE("discount") {
    auto t = coin_tables();
    t.gamma = 1.0;
    CHECK_THROWS_AS(GoalConditionedMDP{t}, ModelError);
    t.gamma = 0.0;
    CHECK_THROWS_AS(GoalConditionedMDP{t}, ModelError);
  }
  SUBCASE("start distribution") {
    auto t = coin_tables();
    t.rho0 = {0.7, 0.7};
    CHECK_THROWS_AS(GoalConditionedMDP{t}, ModelError);
  }
  SUBCASE("onto but not injective M is fine") {
    auto t = coin_tables();
    t.num_actions = 2;
    t.transition = {1, 0, 0, 1, 1, 0, 0, 1};
    t.achieved = {0, 1, 0, 1};
    CHECK_NOTHROW(GoalConditionedMDP{t});
  }
}

TEST_CASE("index checks") {
  const auto m = make_chain(3);
  CHECK_THROWS_AS(m.check_state_action({3, 0}), IndexError);
  CHECK_THROWS_AS(m.check_state_action({0, 2}), IndexError);
  CHECK_THROWS_AS(m.check_goal(3), IndexError);
}

TEST_CASE("seeded stochastic steps are reproducible") {
  auto model = std::make_shared<const GoalConditionedMDP>(coin_tables());
  auto run = [&] {
    TabularEnv env(model, {.horizon = 200});
    Rng rng(42);
    env.reset(rng);
    std::vector<std::size_t> seq;
    while (!env.finished()) seq.push_back(env.step(0, rng).next_state);
    return seq;
  };
  const auto a = run(), b = run();
  CHECK(a == b);
  CHECK(a.size() == 200);
  const auto ones = std::count(a.begin(), a.end(), std::size_t{1});
  CHECK(ones > 60);
  CHECK(ones < 140);
}

TEST_CASE("uniform goal distribution over four goals") {
  GridOptions o;
  o.layout = {2, 2};
  auto model = std::make_shared<const GoalConditionedMDP>(make_gridworld(o));
  TabularEnv env(model);
  Rng rng(3);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 10000; ++i) ++counts[env.reset(rng).second];
  for (int c : counts) CHECK(std::abs(c / 10000.0 - 0.25) <= 0.02);
}

TEST_CASE("tabular episodes") {
  auto model = std::make_shared<const GoalConditionedMDP>(make_chain(3));
  TabularEnv env(model, {.horizon = 3, .terminate_on_goal = true});
  Rng rng(1);
  CHECK_THROWS_AS(env.step(0, rng), StateError);
  auto [s, g] = env.reset(rng);
  CHECK(s == 0);
  std::size_t prev = s;
  while (!env.finished()) {
    const Transition t = env.step(1, rng);
    CHECK(t.state == prev);
    CHECK(t.achieved == model->achieved_goal({t.state, t.action}));
    CHECK(t.reward == (t.achieved == g ? 0.0 : -1.0));
    prev = t.next_state;
  }
  CHECK_THROWS_AS(env.step(0, rng), StateError);
  CHECK_THROWS_AS([&] { env.reset(rng); env.step(5, rng); }(), IndexError);
}

TEST_CASE("gridworld moves") {
  const GridLayout l{5, 5};
  const std::size_t centre = l.cell(2, 2);
  CHECK(l.successor(centre, GridAction::right) == l.cell(3, 2));
  CHECK(l.successor(centre, GridAction::left) == l.cell(1, 2));
  CHECK(l.successor(centre, GridAction::up) == l.cell(2, 3));
  CHECK(l.successor(centre, GridAction::down) == l.cell(2, 1));
  CHECK(l.successor(l.cell(0, 0), GridAction::left) == l.cell(0, 0));
  CHECK(l.successor(l.cell(4, 4), GridAction::up) == l.cell(4, 4));
  CHECK(max_step_displacement(make_gridworld()) == doctest::Approx(1.0));
}

TEST_CASE("random MDP rows depend on (s, a) only through the target") {
  const auto m = make_random_mdp();
  CHECK(m.num_states() == 20);
  for (std::size_t s = 0; s < m.num_states(); ++s) CHECK(m.achieved_goal({s, 0}) == s);
  for (std::size_t x = 0; x < m.num_state_actions(); ++x) {
    for (std::size_t y = 0; y < m.num_state_actions(); ++y) {
      const StateAction a{x / 3, x % 3}, b{y / 3, y % 3};
      if (m.achieved_goal(a) != m.achieved_goal(b)) continue;
      const auto ra = m.transition_row(a), rb = m.transition_row(b);
      CHECK(std::equal(ra.begin(), ra.end(), rb.begin()));
    }
  }
  const auto again = make_random_mdp();
  CHECK(again.tables().transition == m.tables().transition);
}

TEST_CASE("model files round trip") {
  for (const auto& m : {make_chain(3), make_gridworld(), make_random_mdp()}) {
    std::stringstream io;
    write_model(io, m);
    const auto back = read_model(io);
    CHECK(back.tables().transition == m.tables().transition);
    CHECK(back.tables().achieved == m.tables().achieved);
    CHECK(back.tables().goal_embedding == m.tables().goal_embedding);
    CHECK(back.gamma() == m.gamma());
  }
  std::istringstream bad("not a model");
  CHECK_THROWS_AS(read_model(bad), ParseError);
}

TEST_CASE("grid reach env agrees with its enumerated model") {
  GridReachEnv env;
  const auto model = env.enumerate_model();
  CHECK(model.num_states() == 25);
  const Vec acts[] = {Vec::Zero(2), Vec::Unit(2, 0), -Vec::Unit(2, 0), Vec::Unit(2, 1), -Vec::Unit(2, 1)};
  for (std::size_t s = 0; s < 25; ++s) {
    const Vec obs = env.cell_coords(s);
    for (std::size_t a = 0; a < 5; ++a) {
      CHECK(static_cast<std::size_t>(GridReachEnv::snap(acts[a])) == a);
      const Vec ag = env.achieved_goal(obs, acts[a]);
      const auto emb = model.goal_embedding(model.achieved_goal({s, a}));
      CHECK(ag(0) == doctest::Approx(emb[0]));
      CHECK(ag(1) == doctest::Approx(emb[1]));
    }
  }
}

TEST_CASE("grid reach episodes") {
  GridReachEnv env;
  Rng rng(5);
  auto [obs, goal] = env.reset(rng);
  int steps = 0;
  bool done = false;
  while (!done) {
    Vec a(2);
    a << 0.9, -0.2;
    const StepResult r = env.step(a, rng);
    CHECK(r.achieved.isApprox(env.achieved_goal(obs, a)));
    CHECK(r.next_obs.isApprox(r.achieved));
    CHECK(r.reward == env.reward(r.achieved, goal));
    obs = r.next_obs;
    done = r.done;
    ++steps;
  }
  CHECK(steps == env.horizon());
  CHECK_THROWS_AS(env.step(Vec::Zero(2), rng), StateError);
}

TEST_CASE("point reach dynamics") {
  ContinuousReachEnv env;
  Rng rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 2000; ++i) {
    Vec p(2), a(2);
    p << u(rng) / 3, u(rng) / 3;
    a << u(rng), u(rng);
    const Vec q = env.move(p, a);
    CHECK((q - p).norm() <= 0.2 + 1e-12);
    CHECK(q.cwiseAbs().maxCoeff() <= 1.0);
    const Vec ag = env.achieved_goal(p, a);
    CHECK((ag - q).cwiseAbs().maxCoeff() <= 0.05 + 1e-12);
    CHECK((ag - env.achieved_goal(p, a)).norm() == 0.0);
  }
  auto [obs, goal] = env.reset(rng);
  CHECK(obs.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(env.goal_reached(goal, goal));
  CHECK_THROWS_AS(env.enumerate_model(), UnsupportedError);
  ContinuousReachOptions bad;
  bad.max_step = 0.0;
  CHECK_THROWS(ContinuousReachEnv{bad});
}

TEST_CASE("point reach discretization") {
  ContinuousReachOptions o;
  o.discretization = 0.25;
  const auto m = ContinuousReachEnv(o).enumerate_model();
  CHECK(m.num_states() == 81);
  CHECK(m.num_goals() == 81);
  CHECK(max_step_displacement(m) == doctest::Approx(0.25));
  o.discretization = 0.3;
  CHECK_THROWS(ContinuousReachEnv(o).enumerate_model());
}
