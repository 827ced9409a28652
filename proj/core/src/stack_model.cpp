#include "dpsim/stack_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace dpsim::stack {

bool RxQueue::push(const Packet& p) {
  if (q_.size() >= capacity_) {
    ++drops_;
    return false;
  }
  q_.push_back(p);
  return true;
}

std::vector<Packet> RxQueue::poll(std::size_t max_batch) {
  const std::size_t n = std::min(max_batch, q_.size());
  std::vector<Packet> out(q_.begin(), q_.begin() + static_cast<std::ptrdiff_t>(n));
  q_.erase(q_.begin(), q_.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

Steering::Steering(SteeringScheme scheme, std::size_t cores, std::vector<double> weights)
    : scheme_(scheme), cores_(cores) {
  if (cores == 0) throw std::invalid_argument("steering needs at least one core");
  if (scheme == SteeringScheme::explicit_weights) {
    if (weights.size() != cores) {
      throw std::invalid_argument("steering weight vector has " + std::to_string(weights.size()) +
                                  " entries for " + std::to_string(cores) + " cores");
    }
    double acc = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("steering weights must be non-negative");
      acc += w;
      cumulative_.push_back(acc);
    }
    if (!(acc > 0.0)) throw std::invalid_argument("steering weights must not all be zero");
  }
}

std::size_t Steering::steer(RngStream& stream) const {
  if (cores_ == 1) return 0;
  if (scheme_ == SteeringScheme::rss_uniform) return static_cast<std::size_t>(stream.next_below(cores_));
  const double u = stream.next_unit() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cores_ - 1);
}

std::vector<double> Steering::shares() const {
  std::vector<double> out(cores_, 1.0 / static_cast<double>(cores_));
  if (scheme_ == SteeringScheme::explicit_weights) {
    double prev = 0.0;
    for (std::size_t i = 0; i < cores_; ++i) {
      out[i] = (cumulative_[i] - prev) / cumulative_.back();
      prev = cumulative_[i];
    }
  }
  return out;
}

sched::Task make_task(const Packet& packet) {
  sched::Task t;
  t.kind = sched::TaskKind::application;
  t.total_work = packet.work;
  t.remaining_work = packet.work;
  t.arrival = packet.arrival;
  t.request = packet.request;
  t.app = packet.app;
  t.rx_core = packet.steered_core;
  t.rogue = packet.rogue;
  return t;
}

SimTime tx_complete(const sched::Task& task, SimTime now, SimTime window_start, SimTime extra_rtt,
                    LatencyHistogram& histogram) {
  const SimTime latency = (now - task.arrival) + extra_rtt;
  if (task.arrival >= window_start) histogram.record(latency);
  return latency;
}

TimerId IoTimerTable::register_timer(SimTime now, SimTime deadline, std::string purpose, CoreId core) {
  if (deadline < now) throw std::invalid_argument("protocol timer deadline is in the past");
  IoTimer t;
  t.id = static_cast<TimerId>(timers_.size());
  t.deadline = deadline;
  t.purpose = std::move(purpose);
  t.core = core;
  timers_.push_back(std::move(t));
  return timers_.back().id;
}

bool IoTimerTable::expire(TimerId id) {
  IoTimer& t = timers_.at(id);
  if (t.cancelled || t.expired) return false;
  t.expired = true;
  auto& pending = expired_[t.core];
  const auto pos = std::upper_bound(pending.begin(), pending.end(), id, [this](TimerId a, TimerId b) {
    return timers_[a].deadline < timers_[b].deadline;
  });
  pending.insert(pos, id);
  return true;
}

bool IoTimerTable::cancel(TimerId id) {
  IoTimer& t = timers_.at(id);
  if (t.cancelled || t.serviced_at) return false;
  t.cancelled = true;
  if (t.expired) drop_pending(t);
  return true;
}

void IoTimerTable::drop_pending(const IoTimer& t) {
  auto it = expired_.find(t.core);
  if (it == expired_.end()) return;
  auto& v = it->second;
  v.erase(std::remove(v.begin(), v.end(), t.id), v.end());
}

std::vector<TimerId> IoTimerTable::expired_on(CoreId core) const {
  auto it = expired_.find(core);
  if (it == expired_.end()) return {};
  return it->second;
}

bool IoTimerTable::has_expired_on(CoreId core) const {
  auto it = expired_.find(core);
  return it != expired_.end() && !it->second.empty();
}

void IoTimerTable::mark_serviced(TimerId id, SimTime when) {
  IoTimer& t = timers_.at(id);
  t.serviced_at = when;
  drop_pending(t);
}

}  // namespace dpsim::stack
