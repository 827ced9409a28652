#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "dpsim/sim_time.hpp"

namespace dpsim {

using CoreId = std::uint32_t;
using AppId = std::uint32_t;
using RequestId = std::uint64_t;
using TaskId = std::uint32_t;
using TimerId = std::uint32_t;

namespace events {
struct Arrival {
  AppId app;
  RequestId request;
};
struct PreemptionTimerFire {
  CoreId core;
};
struct IoTimerFire {
  TimerId timer;
};
struct TaskCompletion {
  CoreId core;
  TaskId task;
};
/// End of a non-application segment on a core (I/O packet, overhead, send path).
struct CoreStep {
  CoreId core;
};
struct ExperimentEnd {};
}  // namespace events

using EventKind = std::variant<events::Arrival, events::PreemptionTimerFire, events::IoTimerFire,
                               events::TaskCompletion, events::CoreStep, events::ExperimentEnd>;

struct Event {
  SimTime fire_at;
  std::uint64_t seq = 0;
  EventKind kind;
};

/// Identifies one scheduled event. Stale handles (fired or cancelled) are
/// detected through the slot generation.
struct EventHandle {
  std::uint32_t slot = kInvalid;
  std::uint32_t generation = 0;

  static constexpr std::uint32_t kInvalid = 0xffffffffU;
  bool valid() const { return slot != kInvalid; }
};

/// Raised when a handler tries to schedule an event before the current time.
class CausalityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct EngineStats {
  std::uint64_t dispatched = 0;
  std::uint64_t cancelled = 0;
  SimTime clock;
};

/// Discrete-event engine: a virtual clock and an indexed binary heap keyed
/// on (fire_at, seq). Cancellation removes the event from the heap, so a
/// cancelled handler can never run.
class Engine {
 public:
  SimTime now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  std::size_t pending() const { return heap_.size(); }
  std::uint64_t scheduled_total() const { return next_seq_; }
  std::optional<SimTime> next_time() const;

  /// Throws CausalityError when at < now().
  EventHandle schedule(SimTime at, EventKind kind);
  /// True iff the event was still pending; it will never be dispatched.
  bool cancel(EventHandle handle);
  bool is_pending(EventHandle handle) const;

  /// Pops the earliest event and advances the clock to it.
  std::optional<Event> pop();

  /// Dispatches every event with fire_at <= limit in (fire_at, seq) order,
  /// then advances the clock to limit.
  template <typename Handler>
  EngineStats run_until(SimTime limit, Handler&& handler) {
    EngineStats stats;
    while (!heap_.empty() && slots_[heap_.front()].event.fire_at <= limit) {
      Event ev = *pop();
      ++stats.dispatched;
      handler(static_cast<const Event&>(ev));
    }
    if (now_ < limit && !limit.is_infinite()) now_ = limit;
    stats.cancelled = cancelled_;
    stats.clock = now_;
    return stats;
  }

 private:
  struct Slot {
    Event event;
    std::uint32_t generation = 0;
    std::uint32_t heap_pos = kFree;
  };
  static constexpr std::uint32_t kFree = 0xffffffffU;

  bool before(std::uint32_t a, std::uint32_t b) const {
    const Event& x = slots_[a].event;
    const Event& y = slots_[b].event;
    return x.fire_at < y.fire_at || (x.fire_at == y.fire_at && x.seq < y.seq);
  }
  void place(std::size_t pos, std::uint32_t slot) {
    heap_[pos] = slot;
    slots_[slot].heap_pos = static_cast<std::uint32_t>(pos);
  }
  void sift_up(std::size_t pos);
  void sift_down(std::size_t pos);
  void remove_at(std::size_t pos);
  void release(std::uint32_t slot);

  SimTime now_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t cancelled_ = 0;
  std::vector<Slot> slots_;
  std::vector<std::uint32_t> free_;
  std::vector<std::uint32_t> heap_;
};

}  // namespace dpsim
