#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "dpsim/metrics.hpp"
#include "dpsim/rng.hpp"

using namespace dpsim;
using namespace dpsim::literals;

TEST(Histogram, ConstantSamples) {
  LatencyHistogram h;
  for (int i = 0; i < 100; ++i) h.record(5_us);
  EXPECT_EQ(h.percentile(50), 5_us);
  EXPECT_EQ(h.percentile(99), 5_us);
  EXPECT_DOUBLE_EQ(h.mean_ns(), 5000.0);
}

TEST(Histogram, UniformP99) {
  LatencyHistogram h;
  for (std::uint64_t us = 1; us <= 1000; ++us) h.record(SimTime::from_micros(us));
  EXPECT_NEAR(static_cast<double>(h.percentile(99).nanos()), 990e3, 9.9e3);
}

TEST(Histogram, RejectsBadPercentiles) {
  LatencyHistogram h;
  EXPECT_THROW(h.percentile(50), std::invalid_argument);
  h.record(1_us);
  EXPECT_THROW(h.percentile(0), std::invalid_argument);
  EXPECT_THROW(h.percentile(100), std::invalid_argument);
}

TEST(Histogram, EmptyStaysEmpty) {
  LatencyHistogram h;
  EXPECT_TRUE(h.empty());
  EXPECT_EQ(h.count(), 0u);
}

TEST(Histogram, BucketsTileTheLine) {
  for (std::size_t i = 0; i < 3000; ++i) {
    const std::uint64_t lo = LatencyHistogram::bucket_lower(i);
    const std::uint64_t w = LatencyHistogram::bucket_width(i);
    ASSERT_EQ(LatencyHistogram::bucket_of(lo), i);
    ASSERT_EQ(LatencyHistogram::bucket_of(lo + w - 1), i);
    ASSERT_EQ(LatencyHistogram::bucket_lower(i + 1), lo + w);
    if (lo >= 256) {
      ASSERT_LE(static_cast<double>(w) / static_cast<double>(lo), 1.0 / 128.0 + 1e-12);
    }
  }
}

// Percentiles agree with exact order statistics up to bucket resolution.
TEST(Histogram, PropertyPercentileMatchesSortedSamples) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream r(seed, 17);
    LatencyHistogram h;
    std::vector<std::uint64_t> xs;
    for (int i = 0; i < 20000; ++i) {
      const std::uint64_t v = sample_exponential(r, 50_us).nanos();
      xs.push_back(v);
      h.record(SimTime::from_nanos(v));
    }
    std::sort(xs.begin(), xs.end());
    for (double p : {50.0, 90.0, 99.0, 99.9}) {
      const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(xs.size())));
      const double exact = static_cast<double>(xs[rank - 1]);
      EXPECT_NEAR(static_cast<double>(h.percentile(p).nanos()), exact, exact / 128.0 + 1.0);
    }
  }
}

TEST(Histogram, MergeEqualsCombinedRecording) {
  LatencyHistogram a, b, all;
  for (std::uint64_t i = 1; i < 5000; i += 7) {
    (i % 2 ? a : b).record(SimTime::from_nanos(i * 13));
    all.record(SimTime::from_nanos(i * 13));
  }
  a.merge(b);
  EXPECT_EQ(a, all);
}

TEST(Saturation, Detection) {
  AppSummary app;
  EXPECT_FALSE(detect_saturation(app));
  app.in_flight_samples.assign(64, 3);
  EXPECT_FALSE(detect_saturation(app));
  app.in_flight_samples.clear();
  for (std::uint64_t i = 0; i < 64; ++i) app.in_flight_samples.push_back(i * 10);
  EXPECT_TRUE(detect_saturation(app));
  app.in_flight_samples.assign(64, 0);
  EXPECT_FALSE(detect_saturation(app));
}

TEST(Csv, HeaderAndRow) {
  AppSummary app;
  app.offered_load_ops = 1000;
  app.throughput_ops = 999.5;
  app.latency.record(2_us);
  std::ostringstream os;
  write_csv(os, {make_csv_row("x", "cygnus", 3, app)});
  EXPECT_EQ(os.str(), std::string(kCsvHeader) + "\nx,cygnus,3,1000.0,999.5,2000,2000,2000,2000,0,0,0,0.000000\n");
}
