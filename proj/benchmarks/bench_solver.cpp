#include <benchmark/benchmark.h>

#include "gcrl/audit.hpp"
#include "gcrl/model.hpp"
#include "gcrl/solver.hpp"

using namespace gcrl;

static void BM_ValueIterationGrid(benchmark::State& state) {
  GridOptions o;
  o.layout = {static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0))};
  const GoalConditionedMDP m = make_gridworld(o);
  for (auto _ : state) benchmark::DoNotOptimize(solve_qstar(m));
  state.SetLabel(std::to_string(m.num_states()) + " states");
}
BENCHMARK(BM_ValueIterationGrid)->Arg(3)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

static void BM_ValueIterationRandom(benchmark::State& state) {
  const GoalConditionedMDP m = make_random_mdp();
  for (auto _ : state) benchmark::DoNotOptimize(solve_qstar(m));
}
BENCHMARK(BM_ValueIterationRandom)->Unit(benchmark::kMillisecond);

static void BM_TriangleAudit(benchmark::State& state) {
  GridOptions o;
  o.layout = {static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0))};
  const GoalConditionedMDP m = make_gridworld(o);
  const QTable q = solve_qstar(m);
  std::size_t checked = 0;
  for (auto _ : state) {
    const AuditReport r = triangle_audit(q, m, 1e-9);
    checked += r.checked;
    benchmark::DoNotOptimize(r.violations);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(checked));
}
BENCHMARK(BM_TriangleAudit)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_ShapedSolve(benchmark::State& state) {
  const GoalConditionedMDP m = make_gridworld();
  const PotentialSpec spec{DistanceKind::scaled_euclidean, 1.0, m.gamma()};
  const QTable q = solve_qstar(m);
  for (auto _ : state) benchmark::DoNotOptimize(solve_shaped_qstar(m, spec, q));
}
BENCHMARK(BM_ShapedSolve)->Unit(benchmark::kMillisecond);
