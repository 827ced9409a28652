#include <gtest/gtest.h>

#include "dpsim/protection.hpp"
#include "dpsim/rng.hpp"

using namespace dpsim::protection;

namespace {

const GateRegisters kGates = ControlPlane::make_gates(0x7f0000001000ULL, 0x7f0000002000ULL);

PkruState write(PkruState s, std::uint64_t rip, std::uint32_t eax, std::uint32_t ecx = 0, std::uint32_t edx = 0) {
  return std::get<PkruState>(wrpkru(s, WrpkruAttempt{rip, eax, ecx, edx}, kGates));
}

}  // namespace

TEST(Wrpkru, EntryGateWritesAllBits) {
  const auto s = write(PkruState::application_default(), kGates.entry_addr(), 0);
  EXPECT_EQ(s.bits(), 0u);
  EXPECT_TRUE(check_access(s, kDataPlaneKey, AccessKind::write));
}

TEST(Wrpkru, NonGateWritesOnlyLowBits) {
  const auto s = write(PkruState(0), 0x401000, 0xffffffffU);
  EXPECT_EQ(s.ckey_bits(), 0u);
  EXPECT_EQ(s.bits() & 0x3fffffffU, 0x3fffffffU);
  const auto locked = write(PkruState::application_default(), 0x401000, 0);
  EXPECT_TRUE(locked.ckey_locked());
}

TEST(Wrpkru, NonZeroEcxOrEdxFaults) {
  for (auto rip : {kGates.entry_addr(), kGates.exit_addr(), std::uint64_t{0x401000}}) {
    EXPECT_TRUE(std::holds_alternative<GeneralProtectionFault>(
        wrpkru(PkruState(), WrpkruAttempt{rip, 0, 1, 0}, kGates)));
    EXPECT_TRUE(std::holds_alternative<GeneralProtectionFault>(
        wrpkru(PkruState(), WrpkruAttempt{rip, 0, 0, 1}, kGates)));
  }
}

TEST(Wrpkru, RandomNonGateAttemptsNeverTouchTheDataPlaneKey) {
  dpsim::RngStream r(2024, 5);
  PkruState s = PkruState::application_default();
  int changes = 0;
  for (int i = 0; i < 100000; ++i) {
    std::uint64_t rip = r.next_u64();
    if (kGates.is_gate(rip)) ++rip;
    const auto next = write(s, rip, static_cast<std::uint32_t>(r.next_u64()));
    changes += next.ckey_bits() != s.ckey_bits();
    s = next;
  }
  EXPECT_EQ(changes, 0);
}

TEST(Access, Rules) {
  const auto app = PkruState::application_default();
  EXPECT_TRUE(check_access(app, kDataPlaneKey, AccessKind::execute));
  EXPECT_FALSE(check_access(app, kDataPlaneKey, AccessKind::read));
  EXPECT_FALSE(check_access(app, kDataPlaneKey, AccessKind::write));
  const auto k3 = PkruState().with_key(3, false, true);
  EXPECT_FALSE(check_access(k3, 3, AccessKind::write));
  EXPECT_TRUE(check_access(k3, 3, AccessKind::read));
  const auto ad = PkruState().with_key(kDataPlaneKey, true, false);
  EXPECT_FALSE(check_access(ad, kDataPlaneKey, AccessKind::read));
}

TEST(Dpcall, EnterUnlocksAndSwitchesStack) {
  const DomainContext app;
  const auto in = dpcall_enter(app, kGates, PkruState::application_default(), 77);
  EXPECT_EQ(in.context.mode, DomainMode::dataplane);
  EXPECT_EQ(in.context.stack, StackKind::dp_stack);
  EXPECT_EQ(in.context.saved_thread_context, 77u);
  EXPECT_EQ(in.state.ckey_bits(), 0u);
  EXPECT_THROW(dpcall_enter(in.context, kGates, in.state), GateSequenceError);
}

TEST(Dpcall, RoundTripRestoresState) {
  const PkruState before = PkruState::application_default().with_key(2, true, false);
  const auto in = dpcall_enter(DomainContext{}, kGates, before, 5);
  const auto out = dpcall_exit(in.context, kGates, in.state);
  EXPECT_EQ(out.state, before);
  EXPECT_EQ(out.context.mode, DomainMode::application);
  EXPECT_EQ(out.context.stack, StackKind::app_stack);
  EXPECT_THROW(dpcall_exit(out.context, kGates, out.state), GateSequenceError);
  EXPECT_FALSE(check_access(out.state, kDataPlaneKey, AccessKind::read));
}

TEST(GateTrace, LegitimatePairIsClean) {
  const std::vector<TraceEntry> t{
      trace::AppInstruction{0x401000},
      trace::Wrpkru{{kGates.entry_addr(), 0, 0, 0}, std::nullopt},
      trace::StackSwitch{StackKind::dp_stack},
      trace::MemoryAccess{kDataPlaneKey, AccessKind::write, Actor::dataplane},
      trace::StackSwitch{StackKind::app_stack},
      trace::Wrpkru{{kGates.exit_addr(), 0xc0000000U, 0, 0}, std::nullopt},
      trace::AppInstruction{0x401004},
  };
  EXPECT_TRUE(verify_gate_trace(t, kGates).empty());
}

TEST(GateTrace, ForgedDataPlaneWriteIsFlaggedOnce) {
  const std::vector<TraceEntry> t{
      trace::AppInstruction{0x401000},
      trace::MemoryAccess{kDataPlaneKey, AccessKind::write, Actor::application},
      trace::AppInstruction{0x401004},
  };
  const auto v = verify_gate_trace(t, kGates);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], (Violation{1, ViolationKind::application_touched_dataplane}));
}

TEST(GateTrace, ObservedCkeyChangeOffGateIsAnEscape) {
  const std::vector<TraceEntry> t{
      trace::Wrpkru{{0x401000, 0, 0, 0}, PkruState(0)},
  };
  const auto v = verify_gate_trace(t, kGates);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::ckey_changed_outside_gate);
}

TEST(GateTrace, UnlockWithoutStackSwitch) {
  const std::vector<TraceEntry> t{
      trace::Wrpkru{{kGates.entry_addr(), 0, 0, 0}, std::nullopt},
      trace::AppInstruction{0x401000},
  };
  const auto v = verify_gate_trace(t, kGates);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], (Violation{1, ViolationKind::enable_without_stack_switch}));
}
