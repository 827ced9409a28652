#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpsim/protection.hpp"

namespace dpsim::attack {

enum class Outcome { fault, full_write, low_write };

std::string_view to_string(Outcome outcome);
/// Accepts "gp", "full" and "low30".
std::optional<Outcome> parse_outcome(std::string_view token);

/// Default gate addresses used when a corpus has no `gates` line.
inline constexpr std::uint64_t kDefaultEntryGate = 0x7f00'0000'1000ULL;
inline constexpr std::uint64_t kDefaultExitGate = 0x7f00'0000'2000ULL;

struct CorpusLine {
  std::size_t line = 0;
  protection::WrpkruAttempt attempt;
  Outcome expected = Outcome::low_write;
};

/// Line format: `rip_hex eax_hex ecx_hex edx_hex expected`, where expected
/// is gp, full or low30. `gates ENTRY_HEX EXIT_HEX` sets the gate registers
/// for the lines that follow it; `#` starts a comment.
struct Corpus {
  protection::GateRegisters gates = protection::ControlPlane::make_gates(kDefaultEntryGate, kDefaultExitGate);
  std::vector<CorpusLine> lines;
};

/// Throws std::runtime_error naming the offending line.
Corpus parse_corpus(std::istream& in, std::string_view source);

/// What the gate rule says an attempt must do, decided from the operands
/// alone: non-zero ECX or EDX faults, a gate address writes all 32 bits,
/// anything else writes the low 30.
Outcome classify(const protection::WrpkruAttempt& attempt, const protection::GateRegisters& gates);

struct LineVerdict {
  std::size_t line = 0;
  Outcome actual = Outcome::low_write;
  bool matches = true;
  /// The data-plane key changed at a non-gate address.
  bool escape = false;
  protection::PkruState before;
  protection::PkruState after;
};

struct Report {
  std::vector<LineVerdict> verdicts;
  std::size_t mismatches = 0;
  std::size_t escapes = 0;
  std::size_t faults = 0;
  std::size_t full_writes = 0;
  std::size_t low_writes = 0;
  /// Independent pass of the trace verifier over the replayed sequence.
  std::vector<protection::Violation> trace_violations;
};

/// Replays the attempts in order from the application default PKRU.
Report replay(const Corpus& corpus);

/// Writes a random corpus: about one line in ten targets a gate and one in
/// five carries a non-zero ECX or EDX.
void generate_corpus(std::ostream& out, std::size_t lines, std::uint64_t seed);

struct DirectedTrace {
  std::string name;
  std::vector<protection::TraceEntry> trace;
  std::vector<protection::Violation> expected;
};

/// Hand-built control-flow attacks (jumps past or into the gates, stale
/// stacks, direct data-plane accesses) with the violations each must raise.
std::vector<DirectedTrace> directed_traces(const protection::GateRegisters& gates);

}  // namespace dpsim::attack
