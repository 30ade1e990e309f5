#include <benchmark/benchmark.h>

#include "mpsim/lia.hpp"
#include "mpsim/scenario.hpp"
#include "mpsim/sim.hpp"

namespace {

void BM_EventQueueChurn(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    mpsim::Simulator sim;
    mpsim::Rng rng(1);
    for (int i = 0; i < n; ++i) {
      sim.schedule(mpsim::SimTime::from_us(rng.uniform_int(0, 1000000)), "e", [] {});
    }
    auto stats = sim.run_until(mpsim::SimTime::from_seconds(2));
    benchmark::DoNotOptimize(stats.events_processed);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EventQueueChurn)->Arg(1000)->Arg(100000);

void BM_LiaAlpha(benchmark::State& state) {
  std::vector<mpsim::PathState> paths;
  for (int i = 0; i < state.range(0); ++i) {
    paths.push_back({14000.0 * (i + 1), 0.02 * (i + 1)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(mpsim::lia_alpha(paths));
  }
}
BENCHMARK(BM_LiaAlpha)->Arg(1)->Arg(2)->Arg(5);

void BM_ShortScenario(benchmark::State& state) {
  mpsim::ScenarioConfig cfg = mpsim::builtin_scenario("baseline");
  cfg.duration_s = static_cast<double>(state.range(0));
  cfg.rsus = {mpsim::RsuConfig{1, {{0.0, cfg.duration_s}}, 0.0, 0.002}};
  for (auto _ : state) {
    auto result = mpsim::run_scenario(cfg);
    benchmark::DoNotOptimize(result.summary.total_bytes);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ShortScenario)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
