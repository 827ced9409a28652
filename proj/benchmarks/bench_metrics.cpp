#include <benchmark/benchmark.h>

#include "dpsim/metrics.hpp"
#include "dpsim/rng.hpp"

namespace {

void BM_HistogramRecord(benchmark::State& state) {
  dpsim::RngStream rng(3, 0);
  std::vector<dpsim::SimTime> samples(4096);
  for (auto& s : samples) s = dpsim::SimTime::from_nanos(500 + rng.next_below(2'000'000));
  dpsim::LatencyHistogram h;
  std::size_t i = 0;
  for (auto _ : state) {
    h.record(samples[i++ & 4095]);
  }
  benchmark::DoNotOptimize(h.percentile(99.0));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_HistogramRecord);

void BM_HistogramPercentile(benchmark::State& state) {
  dpsim::RngStream rng(4, 0);
  dpsim::LatencyHistogram h;
  for (int i = 0; i < 1'000'000; ++i) h.record(dpsim::SimTime::from_nanos(500 + rng.next_below(2'000'000)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(h.percentile(99.0));
    benchmark::DoNotOptimize(h.percentile(99.9));
  }
}
BENCHMARK(BM_HistogramPercentile);

}  // namespace
