#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace dpsim {

/// Virtual time in integer nanoseconds since simulation start.
///
/// Arithmetic saturates: adding to infinity stays infinity, subtraction
/// clamps at zero. Infinity doubles as "never" for unbounded quanta.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_nanos(std::uint64_t ns) { return SimTime(ns); }
  static constexpr SimTime from_micros(std::uint64_t us) { return SimTime(mul_sat(us, 1'000)); }
  static constexpr SimTime from_millis(std::uint64_t ms) { return SimTime(mul_sat(ms, 1'000'000)); }
  static constexpr SimTime from_seconds(std::uint64_t s) { return SimTime(mul_sat(s, 1'000'000'000)); }
  /// Rounds to the nearest nanosecond; negative input clamps to zero.
  static SimTime from_micros_f(double us);
  static SimTime from_seconds_f(double s);

  static constexpr SimTime zero() { return SimTime(0); }
  static constexpr SimTime infinity() { return SimTime(kInf); }

  constexpr std::uint64_t nanos() const { return ns_; }
  constexpr bool is_infinite() const { return ns_ == kInf; }
  constexpr double micros() const { return static_cast<double>(ns_) / 1e3; }
  constexpr double seconds() const { return static_cast<double>(ns_) / 1e9; }

  constexpr auto operator<=>(const SimTime&) const = default;

  friend constexpr SimTime operator+(SimTime a, SimTime b) {
    return SimTime(a.ns_ > kInf - b.ns_ ? kInf : a.ns_ + b.ns_);
  }
  friend constexpr SimTime operator-(SimTime a, SimTime b) {
    if (a.is_infinite()) return a;
    return SimTime(a.ns_ > b.ns_ ? a.ns_ - b.ns_ : 0);
  }
  friend constexpr SimTime operator*(SimTime a, std::uint64_t k) { return SimTime(mul_sat(a.ns_, k)); }
  constexpr SimTime& operator+=(SimTime o) { return *this = *this + o; }
  constexpr SimTime& operator-=(SimTime o) { return *this = *this - o; }

  std::string to_string() const;

 private:
  static constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max();

  constexpr explicit SimTime(std::uint64_t ns) : ns_(ns) {}

  static constexpr std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b) {
    if (a == kInf || b == kInf) return kInf;
    if (a != 0 && b > kInf / a) return kInf;
    return a * b;
  }

  std::uint64_t ns_ = 0;
};

constexpr SimTime min(SimTime a, SimTime b) { return a < b ? a : b; }
constexpr SimTime max(SimTime a, SimTime b) { return a < b ? b : a; }

namespace literals {
constexpr SimTime operator""_ns(unsigned long long v) { return SimTime::from_nanos(v); }
constexpr SimTime operator""_us(unsigned long long v) { return SimTime::from_micros(v); }
constexpr SimTime operator""_ms(unsigned long long v) { return SimTime::from_millis(v); }
constexpr SimTime operator""_s(unsigned long long v) { return SimTime::from_seconds(v); }
}  // namespace literals

}  // namespace dpsim
