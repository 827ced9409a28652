#include <gtest/gtest.h>

#include <cmath>

#include "dpsim/rng.hpp"

using namespace dpsim;
using namespace dpsim::literals;

TEST(Rng, SameSeedAndStreamRepeat) {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsAreIndependent) {
  RngStream a(42, stream_id_for(0, StreamRole::arrivals));
  RngStream b(42, stream_id_for(0, StreamRole::service));
  int equal = 0;
  for (int i = 0; i < 1000; ++i) equal += a.next_u64() == b.next_u64();
  EXPECT_EQ(equal, 0);
}

namespace {

// Reference xoshiro256** and SplitMix64, written from the published algorithms.
struct ReferenceXoshiro {
  std::uint64_t s[4];
  static std::uint64_t splitmix(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  ReferenceXoshiro(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sid = stream;
    std::uint64_t x = seed ^ splitmix(sid);
    for (auto& w : s) w = splitmix(x);
  }
  std::uint64_t next() {
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
};

}  // namespace

TEST(Rng, MatchesReferenceGenerator) {
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, ~0ULL}) {
    RngStream r(seed, 0x301);
    ReferenceXoshiro ref(seed, 0x301);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(r.next_u64(), ref.next());
  }
}

TEST(Rng, SplitMixFirstOutputForZeroSeed) {
  std::uint64_t x = 0;
  EXPECT_EQ(ReferenceXoshiro::splitmix(x), 0xe220a8397b1dcdafULL);
}

TEST(Rng, UnitIntervalAndBound) {
  RngStream r(3, 3);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.next_unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.next_below(7), 7u);
  }
}

TEST(Rng, ExponentialMeanWithinOnePercent) {
  RngStream r(11, 1);
  double sum = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(sample_exponential(r, 5_us).nanos());
  EXPECT_NEAR(sum / n, 5000.0, 50.0);
}

TEST(Rng, UniformMeanWithinOnePercent) {
  RngStream r(12, 1);
  double sum = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const SimTime s = sample_uniform(r, SimTime::zero(), 5_us);
    ASSERT_LE(s, 5_us);
    sum += static_cast<double>(s.nanos());
  }
  EXPECT_NEAR(sum / n, 2500.0, 25.0);
}

TEST(Rng, BernoulliHitFraction) {
  RngStream r(13, 1);
  int hits = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) hits += sample_bernoulli(r, 0.005);
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.005, 0.001);
}

TEST(Rng, StreamIdLayout) {
  EXPECT_EQ(stream_id_for(0, StreamRole::arrivals), 0u);
  EXPECT_EQ(stream_id_for(2, StreamRole::steering), (2u << 8) | 2u);
}
