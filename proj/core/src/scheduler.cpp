#include "dpsim/scheduler.hpp"

#include <string>

namespace dpsim::sched {

PolicyKind parse_policy(std::string_view name) {
  if (name == "dfcfs") return PolicyKind::dfcfs;
  if (name == "centralized") return PolicyKind::centralized;
  if (name == "stealing") return PolicyKind::stealing;
  if (name == "cygnus") return PolicyKind::cygnus;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "' (expected dfcfs|centralized|stealing|cygnus)");
}

std::string_view to_string(PolicyKind policy) {
  switch (policy) {
    case PolicyKind::dfcfs: return "dfcfs";
    case PolicyKind::centralized: return "centralized";
    case PolicyKind::stealing: return "stealing";
    case PolicyKind::cygnus: return "cygnus";
  }
  return "?";
}

TaskId TaskPool::create(Task task) {
  TaskId id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
  } else {
    id = static_cast<TaskId>(tasks_.size());
    tasks_.emplace_back();
  }
  task.id = id;
  tasks_[id] = task;
  return id;
}

void TaskPool::release(TaskId id) {
  tasks_[id].where = TaskLocation::none;
  free_.push_back(id);
}

void SchedulerParams::validate() const {
  if (batch_pull_n == 0) throw std::invalid_argument("n must be at least 1");
  if (quanta_t == SimTime::zero()) throw std::invalid_argument("t_us must be positive");
  if (preemption_interval == SimTime::zero()) throw std::invalid_argument("preempt_us must be positive");
  if (io_batch == 0) throw std::invalid_argument("io_batch must be at least 1");
}

namespace {

void require_unqueued(const Task& t) {
  if (t.where != TaskLocation::none) {
    throw QueueStateError("task " + std::to_string(t.id) + " is already queued or running");
  }
}

}  // namespace

void on_task_ready(TaskPool& pool, TaskId task, GlobalQueue& global) {
  Task& t = pool[task];
  require_unqueued(t);
  t.where = TaskLocation::global_queue;
  t.epoch_runtime = SimTime::zero();
  global.fifo.push_back(task);
}

void enqueue_local(TaskPool& pool, TaskId task, CoreState& core) {
  Task& t = pool[task];
  require_unqueued(t);
  t.where = TaskLocation::local_queue;
  t.epoch_runtime = SimTime::zero();
  core.local_queue.push_back(task);
}

std::size_t pull_from_global(CoreState& core, GlobalQueue& global, TaskPool& pool, const SchedulerParams& params) {
  if (!core.local_queue.empty()) throw QueueStateError("pull_from_global with a non-empty local queue");
  std::size_t moved = 0;
  while (!global.fifo.empty() && moved < params.batch_pull_n) {
    const TaskId id = global.fifo.front();
    global.fifo.pop_front();
    pool[id].where = TaskLocation::local_queue;
    core.local_queue.push_back(id);
    ++moved;
  }
  return moved;
}

Decision pick_next(CoreState& core, TaskPool& pool, GlobalQueue* global, bool io_timer_expired, bool io_pending,
                   const SchedulerParams& params) {
  if (core.running) throw QueueStateError("pick_next on a core that is still running a task");
  Decision d;
  if (io_timer_expired) {
    d.kind = Decision::Kind::run_io;
    d.reason = Decision::Reason::io_timer;
    return d;
  }
  if (core.local_queue.empty() && global != nullptr) {
    d.pulled = pull_from_global(core, *global, pool, params);
  }
  if (!core.local_queue.empty()) {
    const TaskId head = core.local_queue.front();
    if (pool[head].low_priority && io_pending && !core.io_ran_for_low_priority) {
      core.io_ran_for_low_priority = true;
      d.kind = Decision::Kind::run_io;
      d.reason = Decision::Reason::low_priority_head;
      return d;
    }
    core.io_ran_for_low_priority = false;
    core.local_queue.pop_front();
    pool[head].where = TaskLocation::running;
    core.running = head;
    d.kind = Decision::Kind::run_app;
    d.task = head;
    return d;
  }
  if (io_pending) {
    d.kind = Decision::Kind::run_io;
    d.reason = Decision::Reason::io_pending;
    return d;
  }
  d.kind = Decision::Kind::idle;
  return d;
}

ActivationOutcome on_timer_activation(CoreState& core, TaskPool& pool, GlobalQueue* global,
                                      const SchedulerParams& params) {
  if (!core.running) throw QueueStateError("activation without a running task");
  const TaskId id = *core.running;
  Task& t = pool[id];
  // A timer armed at exactly the remaining budget lands on epoch == T, so
  // the budget counts as exhausted once it is fully used.
  if (params.quanta_t.is_infinite() || t.epoch_runtime < params.quanta_t) return ActivationOutcome::resume;
  core.running.reset();
  t.where = TaskLocation::none;
  t.low_priority = true;
  if (params.preempt_to == PreemptTarget::global_queue && global != nullptr) {
    on_task_ready(pool, id, *global);
  } else {
    enqueue_local(pool, id, core);
  }
  return ActivationOutcome::preempt;
}

SimTime preemption_timer_delay(const Task& task, const SchedulerParams& params) {
  if (params.quanta_t.is_infinite()) return SimTime::infinity();
  const SimTime budget = params.quanta_t - task.epoch_runtime;
  return min(params.preemption_interval, budget);
}

std::optional<TaskId> steal_one(CoreState& thief, std::span<CoreState* const> cores, std::size_t thief_index,
                                TaskPool& pool) {
  const std::size_t n = cores.size();
  for (std::size_t k = 1; k < n; ++k) {
    CoreState& victim = *cores[(thief_index + k) % n];
    if (victim.local_queue.empty()) continue;
    const TaskId id = victim.local_queue.back();
    victim.local_queue.pop_back();
    pool[id].where = TaskLocation::running;
    thief.running = id;
    return id;
  }
  return std::nullopt;
}

namespace {

std::size_t load_of(const CoreState& c) { return c.local_queue.size() + (c.running ? 1 : 0); }

}  // namespace

std::size_t least_loaded(std::span<const CoreState> cores) {
  std::size_t best = 0;
  std::size_t best_load = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < cores.size(); ++i) {
    if (load_of(cores[i]) < best_load) {
      best = i;
      best_load = load_of(cores[i]);
    }
  }
  return best;
}

std::size_t least_loaded(std::span<const CoreState* const> cores) {
  std::size_t best = 0;
  std::size_t best_load = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < cores.size(); ++i) {
    if (load_of(*cores[i]) < best_load) {
      best = i;
      best_load = load_of(*cores[i]);
    }
  }
  return best;
}

}  // namespace dpsim::sched
