#include "dpsim/workload.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dpsim {

ServiceDist::ServiceDist(Variant v) : v_(std::move(v)) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, dist::Constant>) {
          // Zero is allowed: echo requests carry no application work.
          if (d.value.is_infinite()) throw std::invalid_argument("constant service time must be finite");
        } else if constexpr (std::is_same_v<T, dist::Bimodal>) {
          if (!(d.p_long >= 0.0 && d.p_long <= 1.0)) throw std::invalid_argument("bimodal p_long must lie in [0, 1]");
          if (d.short_time == SimTime::zero() || d.long_time == SimTime::zero()) {
            throw std::invalid_argument("bimodal service times must be positive");
          }
        } else {
          if (d.mean == SimTime::zero() || d.mean.is_infinite()) {
            throw std::invalid_argument("service mean must be positive and finite");
          }
        }
      },
      v_);
}

SimTime ServiceDist::sample(RngStream& stream) const {
  return std::visit(
      [&stream](const auto& d) -> SimTime {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, dist::Constant>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, dist::Uniform>) {
          return sample_uniform(stream, SimTime::zero(), d.mean * 2);
        } else if constexpr (std::is_same_v<T, dist::Exponential>) {
          return sample_exponential(stream, d.mean);
        } else {
          return sample_bernoulli(stream, d.p_long) ? d.long_time : d.short_time;
        }
      },
      v_);
}

double ServiceDist::mean_ns() const {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, dist::Constant>) {
          return static_cast<double>(d.value.nanos());
        } else if constexpr (std::is_same_v<T, dist::Bimodal>) {
          return (1.0 - d.p_long) * static_cast<double>(d.short_time.nanos()) +
                 d.p_long * static_cast<double>(d.long_time.nanos());
        } else {
          return static_cast<double>(d.mean.nanos());
        }
      },
      v_);
}

std::string ServiceDist::describe() const {
  std::ostringstream os;
  std::visit(
      [&os](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, dist::Constant>) {
          os << "constant(" << d.value.micros() << "us)";
        } else if constexpr (std::is_same_v<T, dist::Uniform>) {
          os << "uniform(mean " << d.mean.micros() << "us)";
        } else if constexpr (std::is_same_v<T, dist::Exponential>) {
          os << "exponential(mean " << d.mean.micros() << "us)";
        } else {
          os << "bimodal(" << d.p_long << ", " << d.short_time.micros() << "us, " << d.long_time.micros() << "us)";
        }
      },
      v_);
  return os.str();
}

ArrivalGenerator::ArrivalGenerator(double rate_ops, SimTime horizon, RngStream stream)
    : rate_ops_(rate_ops), horizon_(horizon), stream_(std::move(stream)) {
  if (!(rate_ops > 0.0) || !std::isfinite(rate_ops)) {
    throw std::invalid_argument("offered load must be positive");
  }
}

std::optional<SimTime> ArrivalGenerator::next() {
  if (done_) return std::nullopt;
  const double u = stream_.next_unit();
  clock_s_ += -std::log1p(-u) / rate_ops_;
  const SimTime t = SimTime::from_seconds_f(clock_s_);
  if (t >= horizon_) {
    done_ = true;
    return std::nullopt;
  }
  return t;
}

double gbps_to_request_rate(double gbps, std::uint32_t msg_bytes) {
  if (msg_bytes == 0) throw std::invalid_argument("message size must be positive");
  return gbps * 1e9 / (8.0 * static_cast<double>(msg_bytes));
}

}  // namespace dpsim
