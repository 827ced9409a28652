#pragma once

#include <cstdint>
#include <string_view>

#include "dpsim/sim_time.hpp"

namespace dpsim {

enum class OverheadKind {
  gate_switch,
  wrpkru,
  activation,
  posix_signal,
  ipi,
  thread_spawn,
  per_request_stack,
  msg_hop,
};

/// Throws std::invalid_argument for an unknown name.
OverheadKind parse_overhead_kind(std::string_view name);
std::string_view to_string(OverheadKind kind);

/// Fixed overheads in CPU cycles, converted to simulated time on demand.
///
/// Defaults assume a 2.9 GHz Xeon. stack_cycles is the whole per-request
/// network cost of an unprotected echo; RX and TX each take half of it.
struct CostModel {
  std::uint64_t cpu_freq_hz = 2'900'000'000ULL;
  std::uint64_t gate_switch_cycles = 70;
  std::uint64_t wrpkru_cycles = 20;
  std::uint64_t activation_cycles = 1098;
  std::uint64_t posix_signal_cycles = 5645;
  std::uint64_t ipi_cycles = 32417;
  std::uint64_t kernel_thread_spawn_cycles = 152057;
  std::uint64_t per_request_stack_cycles = 2490;
  std::uint64_t msg_hop_cycles = 100;
  SimTime preemption_interval = SimTime::from_micros(10);

  /// Rejects a zero frequency or a zero preemption interval. Zero cycle
  /// counts are allowed.
  void validate() const;

  /// round(cycles / cpu_freq_hz) in nanoseconds, ties rounded up.
  SimTime cycles_to_time(std::uint64_t cycles) const;
  SimTime overhead(OverheadKind kind) const;

  SimTime stack_time() const { return overhead(OverheadKind::per_request_stack); }
  /// RX share of the per-request stack time (takes the odd nanosecond).
  SimTime rx_stack_time() const;
  SimTime tx_stack_time() const;

  bool operator==(const CostModel&) const = default;
};

SimTime cycles_to_time(const CostModel& model, std::uint64_t cycles);
SimTime overhead(const CostModel& model, OverheadKind kind);

}  // namespace dpsim
