#include <gtest/gtest.h>

#include <sstream>

#include "dpsim/attack.hpp"

using namespace dpsim;
using namespace dpsim::attack;

TEST(Corpus, ParsesGatesAndComments) {
  std::istringstream in("# header\ngates 1000 2000\n1000 0 0 0 full  # unlock\n1234 ffffffff 0 0 low30\n");
  const auto c = parse_corpus(in, "c");
  EXPECT_EQ(c.gates.entry_addr(), 0x1000u);
  ASSERT_EQ(c.lines.size(), 2u);
  EXPECT_EQ(c.lines[1].line, 4u);
  EXPECT_EQ(c.lines[1].attempt.eax, 0xffffffffU);
}

TEST(Corpus, ErrorsNameTheLine) {
  std::istringstream in("1000 0 0 0 full\n1000 0 0 zz full\n");
  try {
    parse_corpus(in, "x.corpus");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("x.corpus:2"), std::string::npos);
  }
}

TEST(Replay, GatesWriteFullyAndOperandsFault) {
  std::istringstream in(
      "7f0000001000 0 0 0 full\n"
      "7f0000002000 c0000000 0 0 full\n"
      "401000 0 0 0 low30\n"
      "401000 0 5 0 gp\n"
      "7f0000001000 0 0 9 gp\n");
  const auto r = replay(parse_corpus(in, "c"));
  EXPECT_EQ(r.mismatches, 0u);
  EXPECT_EQ(r.escapes, 0u);
  EXPECT_EQ(r.full_writes, 2u);
  EXPECT_EQ(r.faults, 2u);
  EXPECT_EQ(r.verdicts[0].after.bits(), 0u);
  EXPECT_TRUE(r.verdicts[2].after.ckey_locked());
}

TEST(Replay, WrongExpectationIsAMismatch) {
  std::istringstream in("401000 0 0 0 full\n");
  EXPECT_EQ(replay(parse_corpus(in, "c")).mismatches, 1u);
}

TEST(Replay, RandomCorpusHasNoEscapes) {
  std::stringstream ss;
  generate_corpus(ss, 100000, 7);
  const auto corpus = parse_corpus(ss, "random");
  ASSERT_EQ(corpus.lines.size(), 100000u);
  const auto r = replay(corpus);
  EXPECT_EQ(r.mismatches, 0u);
  EXPECT_EQ(r.escapes, 0u);
  for (const auto& v : r.trace_violations) {
    EXPECT_NE(v.kind, protection::ViolationKind::ckey_changed_outside_gate);
  }
  std::size_t ecx_or_edx = 0;
  std::size_t at_gate = 0;
  for (std::size_t i = 0; i < corpus.lines.size(); ++i) {
    const auto& a = corpus.lines[i].attempt;
    if (a.ecx != 0 || a.edx != 0) {
      ++ecx_or_edx;
      EXPECT_EQ(r.verdicts[i].actual, Outcome::fault);
    } else if (corpus.gates.is_gate(a.rip)) {
      ++at_gate;
      EXPECT_EQ(r.verdicts[i].actual, Outcome::full_write);
    }
  }
  EXPECT_GT(ecx_or_edx, 15000u);
  EXPECT_GT(at_gate, 15000u);
}

TEST(Directed, EveryTraceRaisesExactlyItsExpectedViolations) {
  const auto gates = protection::ControlPlane::make_gates(kDefaultEntryGate, kDefaultExitGate);
  for (const auto& t : directed_traces(gates)) {
    const auto found = protection::verify_gate_trace(t.trace, gates);
    EXPECT_EQ(found, t.expected) << t.name;
    for (const auto& v : found) EXPECT_NE(v.kind, protection::ViolationKind::ckey_changed_outside_gate) << t.name;
  }
}
