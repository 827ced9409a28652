#include "dpsim/protection.hpp"

namespace dpsim::protection {

PkruState PkruState::with_key(unsigned key, bool access_disable, bool write_disable) const {
  const unsigned shift = 2 * key;
  std::uint32_t b = bits_ & ~(0b11U << shift);
  b |= (static_cast<std::uint32_t>(access_disable) | (static_cast<std::uint32_t>(write_disable) << 1)) << shift;
  return PkruState(b);
}

void ControlPlane::program_gates(GateRegisters& regs, std::uint64_t entry, std::uint64_t exit) {
  regs.entry_ = entry;
  regs.exit_ = exit;
}

GateRegisters ControlPlane::make_gates(std::uint64_t entry, std::uint64_t exit) {
  GateRegisters regs;
  program_gates(regs, entry, exit);
  return regs;
}

WrpkruResult wrpkru(PkruState state, const WrpkruAttempt& attempt, const GateRegisters& gates) {
  if (attempt.ecx != 0 || attempt.edx != 0) return GeneralProtectionFault{};
  if (gates.is_gate(attempt.rip)) return PkruState(attempt.eax);
  constexpr std::uint32_t kLowMask = 0x3FFF'FFFFU;
  return PkruState((state.bits() & ~kLowMask) | (attempt.eax & kLowMask));
}

bool check_access(PkruState state, unsigned key, AccessKind kind) {
  switch (kind) {
    case AccessKind::execute: return true;
    case AccessKind::read: return !state.access_disabled(key);
    case AccessKind::write: return !state.access_disabled(key) && !state.write_disabled(key);
  }
  return false;
}

GateCrossing dpcall_enter(const DomainContext& ctx, const GateRegisters& gates, PkruState state,
                          std::uint64_t thread_context) {
  if (ctx.mode != DomainMode::application) throw GateSequenceError("dpcall_enter while already in the data plane");
  const PkruState target = state.with_key(kDataPlaneKey, false, false);
  const auto result = wrpkru(state, WrpkruAttempt{gates.entry_addr(), target.bits(), 0, 0}, gates);
  GateCrossing out;
  out.state = std::get<PkruState>(result);
  out.context.saved_thread_context = thread_context;
  out.context.stack = StackKind::dp_stack;
  out.context.mode = DomainMode::dataplane;
  return out;
}

GateCrossing dpcall_exit(const DomainContext& ctx, const GateRegisters& gates, PkruState state) {
  if (ctx.mode != DomainMode::dataplane) throw GateSequenceError("dpcall_exit from application mode");
  const PkruState target = state.with_key(kDataPlaneKey, true, true);
  GateCrossing out;
  out.context.saved_thread_context = ctx.saved_thread_context;
  out.context.stack = StackKind::app_stack;
  out.state = std::get<PkruState>(wrpkru(state, WrpkruAttempt{gates.exit_addr(), target.bits(), 0, 0}, gates));
  out.context.mode = DomainMode::application;
  return out;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::ckey_changed_outside_gate: return "ckey_changed_outside_gate";
    case ViolationKind::application_touched_dataplane: return "application_touched_dataplane";
    case ViolationKind::enable_without_stack_switch: return "enable_without_stack_switch";
  }
  return "?";
}

std::vector<Violation> verify_gate_trace(std::span<const TraceEntry> entries, const GateRegisters& gates,
                                         PkruState initial) {
  std::vector<Violation> out;
  PkruState state = initial;
  bool awaiting_stack_switch = false;

  for (std::size_t i = 0; i < entries.size(); ++i) {
    const TraceEntry& entry = entries[i];
    if (const auto* w = std::get_if<trace::Wrpkru>(&entry)) {
      const auto result = wrpkru(state, w->attempt, gates);
      if (std::holds_alternative<GeneralProtectionFault>(result)) continue;
      const PkruState after = w->observed_after.value_or(std::get<PkruState>(result));
      if (!gates.is_gate(w->attempt.rip) && after.ckey_bits() != state.ckey_bits()) {
        out.push_back({i, ViolationKind::ckey_changed_outside_gate});
      }
      if (state.ckey_locked() && !after.ckey_locked()) awaiting_stack_switch = true;
      if (after.ckey_locked()) awaiting_stack_switch = false;
      state = after;
    } else if (const auto* m = std::get_if<trace::MemoryAccess>(&entry)) {
      if (m->actor == Actor::application && m->key == kDataPlaneKey && m->kind != AccessKind::execute) {
        out.push_back({i, ViolationKind::application_touched_dataplane});
      }
    } else if (const auto* s = std::get_if<trace::StackSwitch>(&entry)) {
      if (s->to == StackKind::dp_stack) awaiting_stack_switch = false;
    } else if (std::holds_alternative<trace::AppInstruction>(entry)) {
      if (awaiting_stack_switch) {
        out.push_back({i, ViolationKind::enable_without_stack_switch});
        awaiting_stack_switch = false;
      }
    }
  }
  return out;
}

}  // namespace dpsim::protection
