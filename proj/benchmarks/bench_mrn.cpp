#include <benchmark/benchmark.h>

#include <utility>

#include "gcrl/agent.hpp"

using namespace gcrl;

namespace {

struct Fixture {
  ContinuousReachEnv env;
  TrainConfig config;
  AgentNets nets;
  ReplayBuffer buffer{32, 7};
  SampledBatch batch;

  explicit Fixture(int width) {
    config.critic_hidden = {width, width};
    config.head_hidden = {width};
    config.actor_hidden = {width, width};
    nets = AgentNets::create(env, config);
    Rng rng(3);
    for (int i = 0; i < 16; ++i) buffer.store(collect_episode(env, nets.actor, 0.2, 0.3, rng));
    batch = sample_batch(buffer, static_cast<std::size_t>(config.batch_size), 0.8, HerStrategy::future, env);
  }
};

}  // namespace

static void BM_CriticUpdate(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  Optimizer opt({OptimizerKind::adam, 1e-3}, std::as_const(f.nets.critic).arrays());
  for (auto _ : state) benchmark::DoNotOptimize(critic_update(f.batch, f.nets, opt, f.config, f.env));
  state.SetItemsProcessed(state.iterations() * f.batch.size());
}
BENCHMARK(BM_CriticUpdate)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

static void BM_ActorUpdate(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  Optimizer opt({OptimizerKind::adam, 1e-3}, std::as_const(f.nets.actor).arrays());
  for (auto _ : state) benchmark::DoNotOptimize(actor_update(f.batch, f.nets, opt, f.config));
  state.SetItemsProcessed(state.iterations() * f.batch.size());
}
BENCHMARK(BM_ActorUpdate)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

static void BM_SampleBatch(benchmark::State& state) {
  Fixture f(64);
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_batch(f.buffer, 128, 0.8, HerStrategy::future, f.env));
}
BENCHMARK(BM_SampleBatch)->Unit(benchmark::kMicrosecond);
