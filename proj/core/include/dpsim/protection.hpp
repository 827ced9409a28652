#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

namespace dpsim::protection {

inline constexpr unsigned kKeyCount = 16;
/// Key reserved for data-plane memory; occupies PKRU bits [31:30].
inline constexpr unsigned kDataPlaneKey = 15;

enum class AccessKind { read, write, execute };

/// 32-bit PKRU image. Key k owns bits [2k+1:2k] as (WD, AD).
class PkruState {
 public:
  constexpr PkruState() = default;
  constexpr explicit PkruState(std::uint32_t bits) : bits_(bits) {}

  /// Every key accessible except the data-plane key (AD=WD=1).
  static constexpr PkruState application_default() { return PkruState(0xC000'0000U); }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool access_disabled(unsigned key) const { return (bits_ >> (2 * key)) & 1U; }
  constexpr bool write_disabled(unsigned key) const { return (bits_ >> (2 * key + 1)) & 1U; }
  constexpr std::uint32_t ckey_bits() const { return bits_ >> 30; }
  constexpr bool ckey_locked() const { return ckey_bits() == 0b11; }

  /// Copy with key's (AD, WD) replaced.
  PkruState with_key(unsigned key, bool access_disable, bool write_disable) const;

  constexpr bool operator==(const PkruState&) const = default;

 private:
  std::uint32_t bits_ = 0;
};

/// Addresses of the only two instructions allowed to rewrite the data-plane
/// key. Readable by anyone, writable only through ControlPlane.
class GateRegisters {
 public:
  std::uint64_t entry_addr() const { return entry_; }
  std::uint64_t exit_addr() const { return exit_; }
  bool is_gate(std::uint64_t rip) const { return rip == entry_ || rip == exit_; }

 private:
  friend class ControlPlane;
  std::uint64_t entry_ = 0;
  std::uint64_t exit_ = 0;
};

/// The privileged side: programs the gate registers during data-plane setup.
class ControlPlane {
 public:
  static void program_gates(GateRegisters& regs, std::uint64_t entry, std::uint64_t exit);
  static GateRegisters make_gates(std::uint64_t entry, std::uint64_t exit);
};

struct WrpkruAttempt {
  std::uint64_t rip = 0;
  std::uint32_t eax = 0;
  std::uint32_t ecx = 0;
  std::uint32_t edx = 0;
};

/// #GP(0) raised by WRPKRU.
struct GeneralProtectionFault {
  bool operator==(const GeneralProtectionFault&) const = default;
};

using WrpkruResult = std::variant<PkruState, GeneralProtectionFault>;

/// WRPKRU with the gate check: a full 32-bit write only at a gate address,
/// otherwise bits [29:0] are written and [31:30] are preserved.
WrpkruResult wrpkru(PkruState state, const WrpkruAttempt& attempt, const GateRegisters& gates);

/// MPK never gates instruction fetch; read needs AD=0, write needs AD=WD=0.
bool check_access(PkruState state, unsigned key, AccessKind kind);

enum class DomainMode { application, dataplane };
enum class StackKind { app_stack, dp_stack };

struct DomainContext {
  DomainMode mode = DomainMode::application;
  std::uint64_t saved_thread_context = 0;
  StackKind stack = StackKind::app_stack;
};

struct GateCrossing {
  DomainContext context;
  PkruState state;
};

/// Raised for gate misuse that can only come from a simulator bug
/// (double entry, exit without entry).
class GateSequenceError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// WRPKRU at the entry gate clearing the data-plane key's AD/WD, save the
/// thread context, switch to the data-plane stack.
GateCrossing dpcall_enter(const DomainContext& ctx, const GateRegisters& gates, PkruState state,
                          std::uint64_t thread_context = 0);
/// Restore the thread context, switch back to the application stack and
/// set AD/WD for the data-plane key via WRPKRU at the exit gate.
GateCrossing dpcall_exit(const DomainContext& ctx, const GateRegisters& gates, PkruState state);

// --- trace verification -----------------------------------------------------

enum class Actor { application, dataplane };

namespace trace {
struct Wrpkru {
  WrpkruAttempt attempt;
  /// PKRU reported by the hardware under test; when absent the verifier
  /// uses the reference semantics.
  std::optional<PkruState> observed_after;
};
struct MemoryAccess {
  unsigned key = 0;
  AccessKind kind = AccessKind::read;
  Actor actor = Actor::application;
};
struct StackSwitch {
  StackKind to = StackKind::app_stack;
};
/// An application instruction retired at rip.
struct AppInstruction {
  std::uint64_t rip = 0;
};
}  // namespace trace

using TraceEntry = std::variant<trace::Wrpkru, trace::MemoryAccess, trace::StackSwitch, trace::AppInstruction>;

enum class ViolationKind {
  ckey_changed_outside_gate,
  application_touched_dataplane,
  enable_without_stack_switch,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  std::size_t index = 0;
  ViolationKind kind = ViolationKind::ckey_changed_outside_gate;
  bool operator==(const Violation&) const = default;
};

/// Replays a trace from `initial` and reports every point where the data-plane
/// key changed at a non-gate address, application code read or wrote
/// data-plane memory, or an enable was not followed by a switch to the
/// data-plane stack before the next application instruction.
std::vector<Violation> verify_gate_trace(std::span<const TraceEntry> trace, const GateRegisters& gates,
                                         PkruState initial = PkruState::application_default());

}  // namespace dpsim::protection
