#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpsim/engine.hpp"
#include "dpsim/metrics.hpp"
#include "dpsim/rng.hpp"
#include "dpsim/scheduler.hpp"
#include "dpsim/sim_time.hpp"

namespace dpsim::stack {

struct Packet {
  RequestId request = 0;
  SimTime arrival;
  std::uint32_t size_bytes = 64;
  AppId app = 0;
  CoreId steered_core = 0;
  /// Application work the request will demand, sampled at arrival.
  SimTime work;
  bool rogue = false;
};

/// Per-core receive ring. Unbounded unless a capacity is given; overflow
/// drops the packet and counts it.
class RxQueue {
 public:
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

  explicit RxQueue(std::size_t capacity = kUnbounded) : capacity_(capacity) {}

  bool push(const Packet& p);
  /// Removes up to max_batch packets from the head, in arrival order.
  std::vector<Packet> poll(std::size_t max_batch);
  bool empty() const { return q_.empty(); }
  std::size_t size() const { return q_.size(); }
  std::uint64_t drops() const { return drops_; }

 private:
  std::deque<Packet> q_;
  std::size_t capacity_;
  std::uint64_t drops_ = 0;
};

enum class SteeringScheme { rss_uniform, explicit_weights };

/// Maps packets to receive cores from a dedicated random stream.
class Steering {
 public:
  /// Throws std::invalid_argument when cores == 0, or for explicit weights
  /// whose length differs from cores or that do not sum to a positive value.
  Steering(SteeringScheme scheme, std::size_t cores, std::vector<double> weights = {});

  /// Returns a core index in [0, cores).
  std::size_t steer(RngStream& stream) const;
  std::size_t cores() const { return cores_; }
  SteeringScheme scheme() const { return scheme_; }
  /// Expected fraction of packets for each core.
  std::vector<double> shares() const;

 private:
  SteeringScheme scheme_;
  std::size_t cores_;
  std::vector<double> cumulative_;
};

/// Builds the application task for a packet that finished RX processing.
sched::Task make_task(const Packet& packet);

/// Records the end-to-end latency of a finished request when its arrival
/// falls inside the measurement window and returns it.
SimTime tx_complete(const sched::Task& task, SimTime now, SimTime window_start, SimTime extra_rtt,
                    LatencyHistogram& histogram);

struct IoTimer {
  TimerId id = 0;
  SimTime deadline;
  std::string purpose;
  CoreId core = 0;
  bool expired = false;
  bool cancelled = false;
  std::optional<SimTime> serviced_at;
  EventHandle event;
};

/// Protocol timers registered by the I/O stack (retransmission, delayed
/// ACK). Expired timers outrank application work on their core.
class IoTimerTable {
 public:
  /// Throws std::invalid_argument when deadline < now.
  TimerId register_timer(SimTime now, SimTime deadline, std::string purpose, CoreId core);
  IoTimer& at(TimerId id) { return timers_.at(id); }
  const IoTimer& at(TimerId id) const { return timers_.at(id); }
  const std::vector<IoTimer>& all() const { return timers_; }

  /// Marks a timer as expired; returns false when cancelled or already expired.
  bool expire(TimerId id);
  /// Returns false when the timer was already serviced or cancelled.
  bool cancel(TimerId id);
  /// Expired, unserviced timers on a core, in deadline order.
  std::vector<TimerId> expired_on(CoreId core) const;
  bool has_expired_on(CoreId core) const;
  void mark_serviced(TimerId id, SimTime when);

 private:
  void drop_pending(const IoTimer& t);

  std::vector<IoTimer> timers_;
  std::map<CoreId, std::vector<TimerId>> expired_;
};

}  // namespace dpsim::stack
