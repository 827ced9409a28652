#include "dpsim/engine.hpp"

namespace dpsim {

std::optional<SimTime> Engine::next_time() const {
  if (heap_.empty()) return std::nullopt;
  return slots_[heap_.front()].event.fire_at;
}

EventHandle Engine::schedule(SimTime at, EventKind kind) {
  if (at < now_) {
    throw CausalityError("event scheduled in the past: at=" + at.to_string() + " now=" + now_.to_string());
  }
  std::uint32_t slot;
  if (!free_.empty()) {
    slot = free_.back();
    free_.pop_back();
  } else {
    slot = static_cast<std::uint32_t>(slots_.size());
    slots_.emplace_back();
  }
  Slot& s = slots_[slot];
  s.event = Event{at, next_seq_++, std::move(kind)};
  heap_.push_back(slot);
  s.heap_pos = static_cast<std::uint32_t>(heap_.size() - 1);
  sift_up(heap_.size() - 1);
  return EventHandle{slot, s.generation};
}

bool Engine::is_pending(EventHandle handle) const {
  if (!handle.valid() || handle.slot >= slots_.size()) return false;
  const Slot& s = slots_[handle.slot];
  return s.generation == handle.generation && s.heap_pos != kFree;
}

bool Engine::cancel(EventHandle handle) {
  if (!is_pending(handle)) return false;
  remove_at(slots_[handle.slot].heap_pos);
  release(handle.slot);
  ++cancelled_;
  return true;
}

std::optional<Event> Engine::pop() {
  if (heap_.empty()) return std::nullopt;
  const std::uint32_t slot = heap_.front();
  Event ev = std::move(slots_[slot].event);
  remove_at(0);
  release(slot);
  now_ = ev.fire_at;
  return ev;
}

void Engine::release(std::uint32_t slot) {
  Slot& s = slots_[slot];
  s.heap_pos = kFree;
  ++s.generation;
  free_.push_back(slot);
}

void Engine::remove_at(std::size_t pos) {
  const std::size_t last = heap_.size() - 1;
  if (pos != last) {
    place(pos, heap_[last]);
    heap_.pop_back();
    sift_down(pos);
    sift_up(pos);
  } else {
    heap_.pop_back();
  }
}

void Engine::sift_up(std::size_t pos) {
  const std::uint32_t slot = heap_[pos];
  while (pos > 0) {
    const std::size_t parent = (pos - 1) / 2;
    if (!before(slot, heap_[parent])) break;
    place(pos, heap_[parent]);
    pos = parent;
  }
  place(pos, slot);
}

void Engine::sift_down(std::size_t pos) {
  const std::size_t n = heap_.size();
  const std::uint32_t slot = heap_[pos];
  for (;;) {
    std::size_t child = 2 * pos + 1;
    if (child >= n) break;
    if (child + 1 < n && before(heap_[child + 1], heap_[child])) ++child;
    if (!before(heap_[child], slot)) break;
    place(pos, heap_[child]);
    pos = child;
  }
  place(pos, slot);
}

}  // namespace dpsim
