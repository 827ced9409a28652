#include <gtest/gtest.h>

#include "dpsim/sim_time.hpp"

using namespace dpsim;
using namespace dpsim::literals;

TEST(SimTime, UnitConstructors) {
  EXPECT_EQ((1_us).nanos(), 1000u);
  EXPECT_EQ((2_ms).nanos(), 2'000'000u);
  EXPECT_EQ((1_s).nanos(), 1'000'000'000u);
  EXPECT_EQ(SimTime::from_micros_f(2.5).nanos(), 2500u);
  EXPECT_EQ(SimTime::from_micros_f(0.0004).nanos(), 0u);
  EXPECT_EQ(SimTime::from_micros_f(-3.0), SimTime::zero());
}

TEST(SimTime, ArithmeticSaturates) {
  const SimTime inf = SimTime::infinity();
  EXPECT_TRUE((inf + 5_ns).is_infinite());
  EXPECT_TRUE((inf - 5_ns).is_infinite());
  EXPECT_EQ(3_ns - 5_ns, SimTime::zero());
  EXPECT_TRUE((SimTime::from_seconds(1ULL << 40) * (1ULL << 40)).is_infinite());
  EXPECT_EQ((4_us) * 3, 12_us);
}

TEST(SimTime, OrderingAndMinMax) {
  EXPECT_LT(1_ns, 2_ns);
  EXPECT_LT(1_s, SimTime::infinity());
  EXPECT_EQ(min(3_us, 2_us), 2_us);
  EXPECT_EQ(max(3_us, 2_us), 3_us);
}
