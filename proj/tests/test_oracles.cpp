#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <optional>
#include <vector>

#include "dpsim/experiment.hpp"
#include "dpsim/rng.hpp"
#include "fcfs_ps_oracle.hpp"
#include "sim_fixtures.hpp"

using namespace dpsim;
using namespace dpsim::literals;
using dpsim::testing::single_app;
using dpsim::testing::trace_of;
using dpsim::testing::zero_overheads;
using dpsim::testing::poisson_times;
using sched::PolicyKind;

namespace {

void expect_same_trace(const std::vector<CompletionRecord>& a, const std::vector<CompletionRecord>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].request, b[i].request) << "completion " << i;
    ASSERT_EQ(a[i].completed, b[i].completed) << "completion " << i;
    ASSERT_EQ(a[i].arrival, b[i].arrival) << "completion " << i;
  }
}

}  // namespace

// M/M/1 with every overhead off: mean sojourn 1/(mu - lambda), p99 ln(100)/(mu - lambda).
TEST(Oracle, MM1MeanAndTail) {
  for (double rho : {0.5, 0.7}) {
    auto c = single_app(PolicyKind::dfcfs, 1, rho * 2e5, ServiceDist::exponential(5_us), SimTime::from_seconds(5));
    zero_overheads(c);
    c.warmup = SimTime::from_millis(100);
    const auto s = simulate(c, 1);
    const double gap = 2e5 - rho * 2e5;
    const double mean_ns = 1e9 / gap;
    const double p99_ns = std::log(100.0) * 1e9 / gap;
    EXPECT_NEAR(s.apps[0].latency.mean_ns(), mean_ns, 0.05 * mean_ns) << rho;
    EXPECT_NEAR(static_cast<double>(s.apps[0].latency.percentile(99).nanos()), p99_ns, 0.10 * p99_ns) << rho;
  }
}

// Echo at negligible load: every request pays RX, the global-queue pull, the
// entry gate, TX and the exit gate, and nothing else.
TEST(Oracle, EchoZeroLoadLatencyIsSumOfConstants) {
  auto c = build_experiment("echo");
  c.apps[0].load_ops = 1000;
  c.drain = true;
  const CostModel& k = c.cost;
  const SimTime gate = k.overhead(OverheadKind::gate_switch);
  const SimTime hop = k.overhead(OverheadKind::msg_hop);
  const auto trace = trace_of(c, 3);
  ASSERT_GT(trace.size(), 5u);
  for (const auto& r : trace) {
    EXPECT_EQ(r.latency, k.rx_stack_time() + hop + gate + k.tx_stack_time() + gate);
    EXPECT_EQ(r.latency.nanos(), 941u);
  }

  c.policy = PolicyKind::dfcfs;
  for (const auto& r : trace_of(c, 3)) EXPECT_EQ(r.latency.nanos(), 430u + 24u + 429u + 24u);
}

// Three simultaneous requests on one d-FCFS core with 1us of work each.
// The first arrival starts a one-packet I/O slice; the other two wait in
// the ring and are polled together after the first request is sent.
TEST(Oracle, ThreeRequestFcfsRecurrence) {
  auto c = single_app(PolicyKind::dfcfs, 1, 1000, ServiceDist::constant(1_us), 1_ms);
  c.drain = true;
  c.warmup = SimTime::zero();
  SimOptions opt;
  opt.arrival_trace = {std::vector<SimTime>{0_ns, 0_ns, 0_ns}};
  const auto trace = trace_of(c, 1, opt);
  ASSERT_EQ(trace.size(), 3u);
  const std::uint64_t rx = 430, tx = 429, gate = 24, work = 1000;
  const std::uint64_t send = gate + tx + gate;
  const std::uint64_t first = rx + work + send;
  const std::uint64_t second = first + 2 * rx + work + send;
  const std::uint64_t third = second + work + send;
  EXPECT_EQ(trace[0].latency.nanos(), first);
  EXPECT_EQ(trace[1].latency.nanos(), second);
  EXPECT_EQ(trace[2].latency.nanos(), third);
  // Past the first, each request adds exactly one service-plus-send term.
  EXPECT_EQ(third - second, work + send);
}

// Single core, no overheads: the Lindley recurrence is the whole model.
TEST(Oracle, LindleyRecurrenceSingleCore) {
  auto c = single_app(PolicyKind::dfcfs, 1, 150000, ServiceDist::exponential(5_us), 50_ms);
  zero_overheads(c);
  c.drain = true;
  const auto arrivals = poisson_times(5, 150000, c.duration);
  SimOptions opt;
  opt.arrival_trace = {arrivals};
  const auto trace = trace_of(c, 9, opt);
  ASSERT_EQ(trace.size(), arrivals.size());
  RngStream service(9, stream_id_for(0, StreamRole::service));
  SimTime done = SimTime::zero();
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    const SimTime work = c.apps[0].service.sample(service);
    done = max(done, arrivals[i]) + work;
    ASSERT_EQ(trace[i].request, i);
    ASSERT_EQ(trace[i].completed, done) << i;
  }
}

// With T and N unbounded the shared queue never reorders anything, so the
// decentralized scheduler collapses to per-core FIFO run-to-completion.
TEST(Reduction, UnboundedQuantaAndBatchEqualsDfcfs) {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto c = single_app(PolicyKind::cygnus, 1, 150000, ServiceDist::exponential(5_us), 20_ms);
    c.cost.msg_hop_cycles = 0;
    c.sched.quanta_t = SimTime::infinity();
    c.sched.batch_pull_n = sched::SchedulerParams::kUnbounded;
    c.drain = true;
    auto d = c;
    d.policy = PolicyKind::dfcfs;
    expect_same_trace(trace_of(c, seed), trace_of(d, seed));
  }
}

TEST(Reduction, SingleCoreBatchOneMatchesFcfsPsOracle) {
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    for (const auto& service : {ServiceDist::exponential(5_us), ServiceDist::bimodal(0.05, 1_us, 60_us)}) {
      auto c = single_app(PolicyKind::cygnus, 1, 120000, service, 20_ms);
      c.sched.batch_pull_n = 1;
      c.sched.io_batch = 1'000'000;
      c.drain = true;
      const auto arrivals = poisson_times(seed, 120000, c.duration);
      SimOptions opt;
      opt.arrival_trace = {arrivals};
      const auto trace = trace_of(c, seed, opt);

      dpsim::testing::FcfsPsOracle o;
      const CostModel& k = c.cost;
      o.rx = k.rx_stack_time();
      o.tx = k.tx_stack_time();
      o.gate = k.overhead(OverheadKind::gate_switch);
      o.hop = k.overhead(OverheadKind::msg_hop);
      o.act = k.overhead(OverheadKind::activation);
      o.quanta = c.sched.quanta_t;
      o.interval = c.sched.preemption_interval;
      o.arrivals = arrivals;
      RngStream service_rng(seed, stream_id_for(0, StreamRole::service));
      for (std::size_t i = 0; i < arrivals.size(); ++i) o.works.push_back(service.sample(service_rng));
      const auto expected = o.run();

      ASSERT_EQ(trace.size(), expected.size());
      for (std::size_t i = 0; i < trace.size(); ++i) {
        ASSERT_EQ(trace[i].request, expected[i].first) << "seed " << seed << " completion " << i;
        ASSERT_EQ(trace[i].completed, expected[i].second) << "seed " << seed << " completion " << i;
      }
    }
  }
}

// The batch size trades pull traffic against ordering: bigger batches pull
// less often and start more requests out of arrival order.
TEST(Reduction, BatchSizeTradesPullsForOrdering) {
  auto c = single_app(PolicyKind::cygnus, 8, 1.2e6, ServiceDist::exponential(5_us), 20_ms);
  std::uint64_t last_pulls = ~0ULL;
  std::uint64_t first_dev = 0, last_dev = 0;
  for (std::uint32_t n : {1u, 4u, 16u}) {
    c.sched.batch_pull_n = n;
    const auto s = simulate(c, 4).apps[0];
    EXPECT_LT(s.pulls, last_pulls) << n;
    last_pulls = s.pulls;
    if (n == 1) first_dev = s.order_deviations;
    last_dev = s.order_deviations;
  }
  EXPECT_GT(last_dev, first_dev);
}

// Max load whose p99 stays within 50us on M/M/1: mu - ln(100)/50us.
TEST(Oracle, SloSearchOnMM1) {
  auto c = single_app(PolicyKind::dfcfs, 1, 1e5, ServiceDist::exponential(5_us), SimTime::from_seconds(2));
  zero_overheads(c);
  const auto r = max_load_under_slo(c, 1, 50_us, 99.0);
  ASSERT_TRUE(r.attainable);
  const double expected = 2e5 - std::log(100.0) / 50e-6;
  EXPECT_NEAR(expected, 107897.0, 1.0);
  EXPECT_NEAR(r.load_ops, expected, 0.05 * expected);

  const auto none = max_load_under_slo(c, 1, 2_us, 99.0);
  EXPECT_FALSE(none.attainable);
}

// Activation economy: tasks shorter than T never see a timer.
TEST(Oracle, ShortTasksCauseNoActivations) {
  auto c = single_app(PolicyKind::cygnus, 4, 1.5e6, ServiceDist::constant(1_us), 20_ms);
  const auto s = simulate(c, 1);
  EXPECT_EQ(s.apps[0].activations, 0u);
  EXPECT_EQ(s.apps[0].stray_activations, 0u);
}

// Every activation at the default interval costs activation/interval of the core.
TEST(Oracle, ActivationOverheadFraction) {
  const CostModel k;
  const double fraction =
      static_cast<double>(k.overhead(OverheadKind::activation).nanos()) / static_cast<double>(k.preemption_interval.nanos());
  EXPECT_NEAR(fraction, 0.0379, 1e-4);

  auto c = single_app(PolicyKind::cygnus, 1, 1000, ServiceDist::constant(1000_us), 100_ms);
  c.drain = true;
  c.sched.quanta_t = SimTime::from_micros(1'000'000);
  const auto trace = trace_of(c, 2);
  ASSERT_FALSE(trace.empty());
  // 1000us of work preempted every 10us: 99 activations inside the run.
  const std::uint64_t fixed = 430 + 34 + 24 + 429 + 24;
  for (const auto& r : trace) {
    if (r.latency.nanos() < 1'100'000) {
      EXPECT_EQ(r.latency.nanos(), 1'000'000 + fixed + 99 * 379);
    }
  }
}
