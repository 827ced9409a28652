#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dpsim/rng.hpp"
#include "dpsim/sim_time.hpp"

namespace dpsim {

namespace dist {
struct Constant {
  SimTime value;
};
/// Uniform over [0, 2 * mean].
struct Uniform {
  SimTime mean;
};
struct Exponential {
  SimTime mean;
};
struct Bimodal {
  double p_long = 0.0;
  SimTime short_time;
  SimTime long_time;
};
}  // namespace dist

/// Service-time distribution of application work per request.
class ServiceDist {
 public:
  using Variant = std::variant<dist::Constant, dist::Uniform, dist::Exponential, dist::Bimodal>;

  ServiceDist() : v_(dist::Constant{}) {}
  ServiceDist(Variant v);  // NOLINT(google-explicit-constructor)

  static ServiceDist constant(SimTime v) { return ServiceDist(dist::Constant{v}); }
  static ServiceDist uniform(SimTime mean) { return ServiceDist(dist::Uniform{mean}); }
  static ServiceDist exponential(SimTime mean) { return ServiceDist(dist::Exponential{mean}); }
  static ServiceDist bimodal(double p_long, SimTime short_time, SimTime long_time) {
    return ServiceDist(dist::Bimodal{p_long, short_time, long_time});
  }

  const Variant& variant() const { return v_; }
  SimTime sample(RngStream& stream) const;
  /// Analytic mean in nanoseconds.
  double mean_ns() const;
  std::string describe() const;

 private:
  Variant v_;
};

/// Open-loop Poisson arrival process.
class ArrivalGenerator {
 public:
  /// rate_ops must be positive; arrivals are produced in [0, horizon).
  ArrivalGenerator(double rate_ops, SimTime horizon, RngStream stream);

  /// Next arrival time, or nullopt once past the horizon.
  std::optional<SimTime> next();
  double rate_ops() const { return rate_ops_; }

 private:
  double rate_ops_;
  SimTime horizon_;
  RngStream stream_;
  // Arrivals accumulate in double seconds so rounding does not drift the rate.
  double clock_s_ = 0.0;
  bool done_ = false;
};

/// Converts a bit rate to a request rate for fixed-size messages.
double gbps_to_request_rate(double gbps, std::uint32_t msg_bytes);

}  // namespace dpsim
