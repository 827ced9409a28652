#include <benchmark/benchmark.h>

#include "dpsim/engine.hpp"
#include "dpsim/rng.hpp"

namespace {

using dpsim::Engine;
using dpsim::SimTime;

void BM_ScheduleThenDrain(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  dpsim::RngStream rng(1, 0);
  std::vector<std::uint64_t> offsets(n);
  for (auto& o : offsets) o = rng.next_below(1'000'000);
  for (auto _ : state) {
    Engine e;
    for (std::size_t i = 0; i < n; ++i) {
      e.schedule(SimTime::from_nanos(offsets[i]), dpsim::events::CoreStep{static_cast<dpsim::CoreId>(i)});
    }
    while (auto ev = e.pop()) benchmark::DoNotOptimize(ev->fire_at);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_ScheduleThenDrain)->Range(1 << 8, 1 << 16);

// Steady state: one pending timer per core, each re-armed as it fires and
// half of them cancelled and replaced, like preemption timers do.
void BM_TimerChurn(benchmark::State& state) {
  const auto cores = static_cast<std::uint32_t>(state.range(0));
  Engine e;
  dpsim::RngStream rng(2, 0);
  std::vector<dpsim::EventHandle> armed(cores);
  for (std::uint32_t c = 0; c < cores; ++c) {
    armed[c] = e.schedule(SimTime::from_nanos(rng.next_below(5000)), dpsim::events::PreemptionTimerFire{c});
  }
  for (auto _ : state) {
    auto ev = e.pop();
    const auto core = std::get<dpsim::events::PreemptionTimerFire>(ev->kind).core;
    const SimTime now = ev->fire_at;
    armed[core] = e.schedule(now + SimTime::from_nanos(1000 + rng.next_below(5000)),
                             dpsim::events::PreemptionTimerFire{core});
    const auto other = static_cast<std::uint32_t>(rng.next_below(cores));
    if (e.cancel(armed[other])) {
      armed[other] = e.schedule(now + SimTime::from_nanos(rng.next_below(5000)),
                                dpsim::events::PreemptionTimerFire{other});
    }
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_TimerChurn)->Arg(16)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
