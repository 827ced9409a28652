#include "dpsim/attack.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dpsim/rng.hpp"

namespace dpsim::attack {

using protection::AccessKind;
using protection::Actor;
using protection::GateRegisters;
using protection::PkruState;
using protection::TraceEntry;
using protection::Violation;
using protection::ViolationKind;
using protection::WrpkruAttempt;

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::fault: return "gp";
    case Outcome::full_write: return "full";
    case Outcome::low_write: return "low30";
  }
  return "?";
}

std::optional<Outcome> parse_outcome(std::string_view token) {
  if (token == "gp") return Outcome::fault;
  if (token == "full") return Outcome::full_write;
  if (token == "low30") return Outcome::low_write;
  return std::nullopt;
}

namespace {

std::optional<std::uint64_t> parse_hex(std::string_view s) {
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Corpus parse_corpus(std::istream& in, std::string_view source) {
  Corpus corpus;
  std::string raw;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error(std::string(source) + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream fields(raw);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "gates") {
      if (tok.size() != 3) fail("expected 'gates ENTRY_HEX EXIT_HEX'");
      const auto entry = parse_hex(tok[1]);
      const auto exit = parse_hex(tok[2]);
      if (!entry || !exit) fail("gate addresses must be hexadecimal");
      protection::ControlPlane::program_gates(corpus.gates, *entry, *exit);
      continue;
    }
    if (tok.size() != 5) fail("expected 'rip eax ecx edx expected', got " + std::to_string(tok.size()) + " fields");
    WrpkruAttempt a;
    const auto rip = parse_hex(tok[0]);
    const auto eax = parse_hex(tok[1]);
    const auto ecx = parse_hex(tok[2]);
    const auto edx = parse_hex(tok[3]);
    if (!rip || !eax || !ecx || !edx) fail("register fields must be hexadecimal");
    if (*eax > 0xffffffffULL || *ecx > 0xffffffffULL || *edx > 0xffffffffULL) fail("eax, ecx and edx are 32-bit");
    a.rip = *rip;
    a.eax = static_cast<std::uint32_t>(*eax);
    a.ecx = static_cast<std::uint32_t>(*ecx);
    a.edx = static_cast<std::uint32_t>(*edx);
    const auto expected = parse_outcome(tok[4]);
    if (!expected) fail("expected result must be gp, full or low30, got '" + tok[4] + "'");
    corpus.lines.push_back(CorpusLine{lineno, a, *expected});
  }
  return corpus;
}

Outcome classify(const WrpkruAttempt& attempt, const GateRegisters& gates) {
  if (attempt.ecx != 0 || attempt.edx != 0) return Outcome::fault;
  if (attempt.rip == gates.entry_addr() || attempt.rip == gates.exit_addr()) return Outcome::full_write;
  return Outcome::low_write;
}

Report replay(const Corpus& corpus) {
  Report report;
  PkruState state = PkruState::application_default();
  std::vector<TraceEntry> trace;
  trace.reserve(corpus.lines.size());
  for (const auto& line : corpus.lines) {
    LineVerdict v;
    v.line = line.line;
    v.before = state;
    const auto result = protection::wrpkru(state, line.attempt, corpus.gates);
    if (std::holds_alternative<protection::GeneralProtectionFault>(result)) {
      v.actual = Outcome::fault;
      v.after = state;
      ++report.faults;
      trace.emplace_back(protection::trace::Wrpkru{line.attempt, std::nullopt});
    } else {
      const PkruState next = std::get<PkruState>(result);
      const bool gate = corpus.gates.is_gate(line.attempt.rip);
      // A gate write that happens to keep bits 31:30 is still a full write.
      v.actual = gate ? Outcome::full_write : Outcome::low_write;
      if (!gate && next.ckey_bits() != state.ckey_bits()) v.escape = true;
      if (!gate && (next.bits() & 0x3fffffffU) != (line.attempt.eax & 0x3fffffffU)) v.matches = false;
      if (gate && next.bits() != line.attempt.eax) v.matches = false;
      v.after = next;
      state = next;
      ++(gate ? report.full_writes : report.low_writes);
      trace.emplace_back(protection::trace::Wrpkru{line.attempt, next});
    }
    if (v.actual != line.expected) v.matches = false;
    if (!v.matches) ++report.mismatches;
    if (v.escape) ++report.escapes;
    report.verdicts.push_back(v);
  }
  report.trace_violations = protection::verify_gate_trace(trace, corpus.gates);
  return report;
}

void generate_corpus(std::ostream& out, std::size_t lines, std::uint64_t seed) {
  RngStream rng(seed, 0xa77ac);
  const GateRegisters gates = protection::ControlPlane::make_gates(kDefaultEntryGate, kDefaultExitGate);
  out << "# random WRPKRU attempts: rip eax ecx edx expected\n";
  char buf[128];
  for (std::size_t i = 0; i < lines; ++i) {
    WrpkruAttempt a;
    switch (rng.next_below(10)) {
      case 0: a.rip = gates.entry_addr(); break;
      case 1: a.rip = gates.exit_addr(); break;
      default: a.rip = rng.next_u64(); break;
    }
    a.eax = static_cast<std::uint32_t>(rng.next_u64());
    switch (rng.next_below(10)) {
      case 0: a.ecx = static_cast<std::uint32_t>(rng.next_u64()) | 1U; break;
      case 1: a.edx = static_cast<std::uint32_t>(rng.next_u64()) | 1U; break;
      default: break;
    }
    std::snprintf(buf, sizeof buf, "%llx %08x %x %x %s\n", static_cast<unsigned long long>(a.rip), a.eax, a.ecx, a.edx,
                  std::string(to_string(classify(a, gates))).c_str());
    out << buf;
  }
}

std::vector<DirectedTrace> directed_traces(const GateRegisters& gates) {
  namespace tr = protection::trace;
  const std::uint64_t entry = gates.entry_addr();
  const std::uint64_t exit = gates.exit_addr();
  const std::uint32_t open = 0x0000'0000U;
  const std::uint32_t locked = PkruState::application_default().bits();
  const std::uint64_t app_rip = 0x0040'2000ULL;
  auto wr = [](std::uint64_t rip, std::uint32_t eax, std::uint32_t ecx = 0) {
    return TraceEntry{tr::Wrpkru{WrpkruAttempt{rip, eax, ecx, 0}, std::nullopt}};
  };
  auto access = [](unsigned key, AccessKind kind, Actor actor) { return TraceEntry{tr::MemoryAccess{key, kind, actor}}; };
  auto to_dp = TraceEntry{tr::StackSwitch{protection::StackKind::dp_stack}};
  auto to_app = TraceEntry{tr::StackSwitch{protection::StackKind::app_stack}};
  auto insn = TraceEntry{tr::AppInstruction{app_rip}};

  std::vector<DirectedTrace> out;
  out.push_back({"legitimate dpcall",
                 {insn, wr(entry, open), to_dp, access(15, AccessKind::write, Actor::dataplane), to_app,
                  wr(exit, locked), insn},
                 {}});
  out.push_back({"jump one byte past the entry gate",
                 {wr(entry + 1, open), access(15, AccessKind::read, Actor::application)},
                 {Violation{1, ViolationKind::application_touched_dataplane}}});
  out.push_back({"gadget before the entry gate",
                 {wr(entry - 3, open), wr(app_rip, 0x8000'0000U), insn},
                 {}});
  out.push_back({"return into application code after the entry gate",
                 {wr(entry, open), insn, to_dp},
                 {Violation{1, ViolationKind::enable_without_stack_switch}}});
  out.push_back({"exit gate reused to unlock",
                 {wr(exit, open), insn},
                 {Violation{1, ViolationKind::enable_without_stack_switch}}});
  out.push_back({"forged write to the data-plane stack",
                 {insn, access(15, AccessKind::write, Actor::application), insn},
                 {Violation{1, ViolationKind::application_touched_dataplane}}});
  out.push_back({"ecx smuggled through the entry gate",
                 {wr(entry, open, 1), insn, access(3, AccessKind::write, Actor::application)},
                 {}});
  out.push_back({"application key management stays legal",
                 {wr(app_rip, locked | 0x0000'000cU), access(1, AccessKind::read, Actor::application),
                  access(3, AccessKind::read, Actor::application)},
                 {}});
  return out;
}

}  // namespace dpsim::attack
