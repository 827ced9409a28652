#include <benchmark/benchmark.h>

#include "dpsim/experiment_config.hpp"
#include "dpsim/simulator.hpp"

namespace {

void run_preset(benchmark::State& state, const char* preset, dpsim::sched::PolicyKind policy) {
  auto cfg = dpsim::build_experiment(preset);
  cfg.policy = policy;
  cfg.duration = dpsim::SimTime::from_millis(static_cast<std::uint64_t>(state.range(0)));
  std::uint64_t completions = 0;
  for (auto _ : state) {
    const auto s = dpsim::simulate(cfg, 1);
    for (const auto& a : s.apps) completions += a.completions;
  }
  state.counters["requests/s"] = benchmark::Counter(static_cast<double>(completions), benchmark::Counter::kIsRate);
}

void BM_BimodalCygnus(benchmark::State& state) { run_preset(state, "bimodal", dpsim::sched::PolicyKind::cygnus); }
void BM_BimodalDfcfs(benchmark::State& state) { run_preset(state, "bimodal", dpsim::sched::PolicyKind::dfcfs); }
void BM_ImbalancedStealing(benchmark::State& state) {
  run_preset(state, "imbalanced", dpsim::sched::PolicyKind::stealing);
}

BENCHMARK(BM_BimodalCygnus)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BimodalDfcfs)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ImbalancedStealing)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
