#include "dpsim/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpsim {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  std::uint64_t sid = stream_id;
  std::uint64_t x = seed ^ splitmix64(sid);
  for (auto& word : s_) word = splitmix64(x);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::next_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
  // Lemire's nearly-divisionless rejection.
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

SimTime sample_exponential(RngStream& stream, SimTime mean) {
  if (mean == SimTime::zero() || mean.is_infinite()) {
    throw std::invalid_argument("sample_exponential: mean must be positive and finite");
  }
  const double u = stream.next_unit();
  const double v = -std::log1p(-u) * static_cast<double>(mean.nanos());
  return SimTime::from_nanos(static_cast<std::uint64_t>(std::llround(v)));
}

SimTime sample_uniform(RngStream& stream, SimTime lo, SimTime hi) {
  if (hi < lo) throw std::invalid_argument("sample_uniform: lo must not exceed hi");
  if (hi.is_infinite()) throw std::invalid_argument("sample_uniform: bounds must be finite");
  const std::uint64_t span = hi.nanos() - lo.nanos();
  if (span == std::numeric_limits<std::uint64_t>::max()) {
    return SimTime::from_nanos(stream.next_u64());
  }
  return lo + SimTime::from_nanos(stream.next_below(span + 1));
}

bool sample_bernoulli(RngStream& stream, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_bernoulli: p must lie in [0, 1]");
  return stream.next_unit() < p;
}

}  // namespace dpsim
