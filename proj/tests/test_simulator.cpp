#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "dpsim/experiment.hpp"
#include "sim_fixtures.hpp"

using namespace dpsim;
using namespace dpsim::literals;
using dpsim::testing::single_app;
using dpsim::testing::trace_of;
using sched::PolicyKind;

namespace {

const PolicyKind kAll[] = {PolicyKind::dfcfs, PolicyKind::stealing, PolicyKind::cygnus, PolicyKind::centralized};

ExperimentConfig mixed(PolicyKind p, double load) {
  auto c = single_app(p, 4, load, ServiceDist::bimodal(0.02, 1_us, 50_us), 10_ms);
  if (p == PolicyKind::centralized) c.io_cores = 2;
  c.check_invariants = true;
  return c;
}

void expect_conserved(const SimSummary& s) {
  for (const auto& a : s.apps) {
    EXPECT_EQ(a.arrivals, a.completions + a.in_flight + a.violations + a.rx_drops) << a.name;
  }
}

std::string csv_of(const SimSummary& s) {
  std::ostringstream os;
  std::vector<CsvRow> rows;
  for (const auto& a : s.apps) rows.push_back(make_csv_row("x", "p", 1, a));
  write_csv(os, rows);
  return os.str();
}

}  // namespace

TEST(Simulator, SameSeedSameSummary) {
  for (auto p : kAll) {
    const auto c = mixed(p, 6e5);
    const auto a = simulate(c, 77);
    const auto b = simulate(c, 77);
    EXPECT_EQ(csv_of(a), csv_of(b));
    EXPECT_EQ(a.apps[0].latency, b.apps[0].latency);
    EXPECT_EQ(a.events, b.events);
    EXPECT_EQ(a.apps[0].in_flight_samples, b.apps[0].in_flight_samples);
  }
}

TEST(Simulator, DifferentSeedsDiffer) {
  const auto c = mixed(PolicyKind::cygnus, 6e5);
  EXPECT_NE(simulate(c, 1).apps[0].arrivals, simulate(c, 2).apps[0].arrivals);
}

// Property: across policies, seeds and loads (including overload) every
// arrival is accounted for, and a drained run ends with nothing in flight.
TEST(Simulator, PropertyConservation) {
  for (auto p : kAll) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      for (double load : {2e5, 8e5, 2e6}) {
        auto c = mixed(p, load);
        expect_conserved(simulate(c, seed));
        c.drain = true;
        const auto s = simulate(c, seed);
        expect_conserved(s);
        EXPECT_EQ(s.apps[0].in_flight, 0u);
        EXPECT_EQ(s.apps[0].completions, s.apps[0].arrivals);
        EXPECT_EQ(s.gate_enters, s.gate_exits);
        EXPECT_EQ(s.work_conservation_breaches, 0u);
      }
    }
  }
}

TEST(Simulator, GatesOnlyOnDecentralizedSendPath) {
  auto c = mixed(PolicyKind::cygnus, 3e5);
  c.drain = true;
  auto s = simulate(c, 1);
  EXPECT_EQ(s.gate_enters, s.apps[0].completions);
  c.protection = false;
  EXPECT_EQ(simulate(c, 1).gate_enters, 0u);
  auto z = mixed(PolicyKind::centralized, 3e5);
  EXPECT_EQ(simulate(z, 1).gate_enters, 0u);
}

TEST(Simulator, NoTaskRunsLongerThanQuanta) {
  auto c = single_app(PolicyKind::cygnus, 4, 1e5, ServiceDist::exponential(30_us), 20_ms);
  const auto s = simulate(c, 3);
  EXPECT_LE(s.max_uninterrupted_run, c.sched.quanta_t);
  EXPECT_GT(s.apps[0].preemptions, 0u);
  c.policy = PolicyKind::dfcfs;
  EXPECT_GT(simulate(c, 3).max_uninterrupted_run, 100_us);
}

TEST(Simulator, LongTasksArePreemptedRepeatedly) {
  auto c = single_app(PolicyKind::cygnus, 4, 8e4, ServiceDist::constant(25_us), 20_ms);
  c.drain = true;
  const auto s = simulate(c, 1);
  EXPECT_GE(s.apps[0].preemptions, 2 * s.apps[0].completions);
  EXPECT_EQ(s.apps[0].stray_activations, 0u);
}

TEST(Simulator, RogueTasksAreStoppedAndCounted) {
  auto c = single_app(PolicyKind::cygnus, 2, 2e5, ServiceDist::exponential(2_us), 10_ms);
  c.apps[0].rogue_fraction = 0.1;
  c.drain = true;
  const auto s = simulate(c, 5);
  const auto& a = s.apps[0];
  EXPECT_GT(a.violations, 100u);
  EXPECT_NEAR(static_cast<double>(a.violations) / static_cast<double>(a.arrivals), 0.1, 0.02);
  EXPECT_EQ(a.completions + a.violations, a.arrivals);
}

TEST(Simulator, BoundedRingDropsAreAccounted) {
  auto c = single_app(PolicyKind::dfcfs, 1, 5e5, ServiceDist::constant(5_us), 5_ms);
  c.rx_capacity = 4;
  const auto s = simulate(c, 1);
  EXPECT_GT(s.apps[0].rx_drops, 0u);
  expect_conserved(s);
}

// Protocol timers fire every 50us on every core under heavy load. Each is
// serviced no later than one full I/O slice, one send path, an activation
// and its own RX-sized service after the deadline.
TEST(Simulator, ProtocolTimersAreTimely) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto c = single_app(PolicyKind::cygnus, 4, 5e5, ServiceDist::exponential(5_us), 20_ms);
    c.timer_period = 50_us;
    const auto s = simulate(c, seed);
    const CostModel& k = c.cost;
    const SimTime rx = k.rx_stack_time();
    const SimTime bound = rx * c.sched.io_batch + k.overhead(OverheadKind::msg_hop) +
                          k.overhead(OverheadKind::gate_switch) * 2 + k.tx_stack_time() +
                          k.overhead(OverheadKind::activation) + rx;
    EXPECT_GT(s.io_timers_serviced, 4u * 300u);
    EXPECT_LE(s.max_timer_lateness, bound);
  }
}

TEST(Simulator, ProtocolTimersRejectedForCentralized) {
  auto c = mixed(PolicyKind::centralized, 1e5);
  c.timer_period = 50_us;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Simulator, StealingBeatsDfcfsWhenImbalanced) {
  auto c = build_experiment("imbalanced");
  c.duration = 20_ms;
  c.apps[0].load_ops = 8e5;
  for (std::uint64_t seed : {1, 2, 3}) {
    c.policy = PolicyKind::dfcfs;
    const auto d = simulate(c, seed).apps[0].latency.percentile(99);
    c.policy = PolicyKind::stealing;
    const auto s = simulate(c, seed);
    EXPECT_LT(s.apps[0].latency.percentile(99), d);
    EXPECT_GT(s.apps[0].steals, 0u);
  }
}

// One I/O core feeding seven app cores saturates at 1/(stack + 2 hops).
TEST(Simulator, StackBoundCentralizedSaturatesAtIoCapacity) {
  auto c = single_app(PolicyKind::centralized, 7, 3e6, ServiceDist::constant(1_us), 20_ms);
  c.io_cores = 1;
  const auto s = simulate(c, 1);
  const CostModel& k = c.cost;
  const double capacity =
      1e9 / static_cast<double>((k.stack_time() + k.overhead(OverheadKind::msg_hop) * 2).nanos());
  EXPECT_NEAR(capacity, 1.0787e6, 1e3);
  EXPECT_NEAR(s.apps[0].throughput_ops, capacity, 0.02 * capacity);
}

TEST(Simulator, SaturationDetection) {
  auto c = single_app(PolicyKind::dfcfs, 1, 0.5 * 2e5, ServiceDist::exponential(5_us), 50_ms);
  dpsim::testing::zero_overheads(c);
  EXPECT_FALSE(detect_saturation(simulate(c, 1).apps[0]));
  c.apps[0].load_ops = 1.2 * 2e5;
  EXPECT_TRUE(detect_saturation(simulate(c, 1).apps[0]));
}

TEST(Simulator, CompletionTraceIsTimeOrdered) {
  auto c = mixed(PolicyKind::stealing, 8e5);
  const auto t = trace_of(c, 2);
  ASSERT_FALSE(t.empty());
  for (std::size_t i = 1; i < t.size(); ++i) ASSERT_LE(t[i - 1].completed, t[i].completed);
  for (const auto& r : t) ASSERT_EQ(r.latency, r.completed - r.arrival);
}

TEST(Simulator, InjectedTraceMustBeSorted) {
  auto c = mixed(PolicyKind::dfcfs, 1e5);
  SimOptions opt;
  opt.arrival_trace = {std::vector<SimTime>{2_us, 1_us}};
  EXPECT_THROW(simulate(c, 1, opt), std::invalid_argument);
}
