#include "dpsim/cost_model.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <utility>

namespace dpsim {
namespace {

constexpr std::array<std::pair<std::string_view, OverheadKind>, 8> kNames{{
    {"gate_switch", OverheadKind::gate_switch},
    {"wrpkru", OverheadKind::wrpkru},
    {"activation", OverheadKind::activation},
    {"posix_signal", OverheadKind::posix_signal},
    {"ipi", OverheadKind::ipi},
    {"thread_spawn", OverheadKind::thread_spawn},
    {"per_request_stack", OverheadKind::per_request_stack},
    {"msg_hop", OverheadKind::msg_hop},
}};

}  // namespace

OverheadKind parse_overhead_kind(std::string_view name) {
  for (const auto& [n, k] : kNames) {
    if (n == name) return k;
  }
  throw std::invalid_argument("unknown overhead kind '" + std::string(name) + "'");
}

std::string_view to_string(OverheadKind kind) {
  for (const auto& [n, k] : kNames) {
    if (k == kind) return n;
  }
  return "?";
}

void CostModel::validate() const {
  if (cpu_freq_hz == 0) throw std::invalid_argument("cost.cpu_freq_hz must be positive");
  if (preemption_interval == SimTime::zero()) {
    throw std::invalid_argument("preemption interval must be positive");
  }
}

SimTime CostModel::cycles_to_time(std::uint64_t cycles) const {
  const unsigned __int128 num = static_cast<unsigned __int128>(cycles) * 1'000'000'000U + cpu_freq_hz / 2;
  const unsigned __int128 ns = num / cpu_freq_hz;
  if (ns >= static_cast<unsigned __int128>(SimTime::infinity().nanos())) return SimTime::infinity();
  return SimTime::from_nanos(static_cast<std::uint64_t>(ns));
}

SimTime CostModel::overhead(OverheadKind kind) const {
  switch (kind) {
    case OverheadKind::gate_switch: return cycles_to_time(gate_switch_cycles);
    case OverheadKind::wrpkru: return cycles_to_time(wrpkru_cycles);
    case OverheadKind::activation: return cycles_to_time(activation_cycles);
    case OverheadKind::posix_signal: return cycles_to_time(posix_signal_cycles);
    case OverheadKind::ipi: return cycles_to_time(ipi_cycles);
    case OverheadKind::thread_spawn: return cycles_to_time(kernel_thread_spawn_cycles);
    case OverheadKind::per_request_stack: return cycles_to_time(per_request_stack_cycles);
    case OverheadKind::msg_hop: return cycles_to_time(msg_hop_cycles);
  }
  throw std::invalid_argument("unknown overhead kind");
}

SimTime CostModel::rx_stack_time() const {
  const SimTime total = stack_time();
  return total - SimTime::from_nanos(total.nanos() / 2);
}

SimTime CostModel::tx_stack_time() const { return SimTime::from_nanos(stack_time().nanos() / 2); }

SimTime cycles_to_time(const CostModel& model, std::uint64_t cycles) { return model.cycles_to_time(cycles); }
SimTime overhead(const CostModel& model, OverheadKind kind) { return model.overhead(kind); }

}  // namespace dpsim
