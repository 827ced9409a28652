#pragma once

#include <array>
#include <cstdint>

#include "dpsim/sim_time.hpp"

namespace dpsim {

/// Portable pseudo-random stream: xoshiro256** whose state is expanded
/// from (seed, stream_id) with SplitMix64. Identical inputs give identical
/// sequences on every platform; no std:: engines or distributions are used.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 bits of precision.
  double next_unit();
  /// Uniform integer in [0, bound) without modulo bias. bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> s_{};
};

/// Exponential with the given mean, rounded to the nearest nanosecond.
SimTime sample_exponential(RngStream& stream, SimTime mean);
/// Uniform integer nanoseconds in [lo, hi] (both ends inclusive).
SimTime sample_uniform(RngStream& stream, SimTime lo, SimTime hi);
bool sample_bernoulli(RngStream& stream, double p);

/// One stream per logical source: stream id = (app << 8) | role.
enum class StreamRole : std::uint64_t {
  arrivals = 0,
  service = 1,
  steering = 2,
  rogue = 3,
};

constexpr std::uint64_t stream_id_for(std::uint32_t app, StreamRole role) {
  return (static_cast<std::uint64_t>(app) << 8) | static_cast<std::uint64_t>(role);
}

}  // namespace dpsim
