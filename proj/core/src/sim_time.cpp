#include "dpsim/sim_time.hpp"

#include <cmath>

namespace dpsim {

SimTime SimTime::from_micros_f(double us) { return from_seconds_f(us * 1e-6); }

SimTime SimTime::from_seconds_f(double s) {
  if (std::isinf(s) && s > 0) return infinity();
  if (!(s > 0)) return zero();
  const double ns = std::round(s * 1e9);
  if (ns >= 1.8e19) return infinity();
  return SimTime(static_cast<std::uint64_t>(ns));
}

std::string SimTime::to_string() const {
  if (is_infinite()) return "inf";
  return std::to_string(ns_) + "ns";
}

}  // namespace dpsim
