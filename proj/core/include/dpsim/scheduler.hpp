#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "dpsim/engine.hpp"
#include "dpsim/sim_time.hpp"

namespace dpsim::sched {

enum class PolicyKind { dfcfs, centralized, stealing, cygnus };

PolicyKind parse_policy(std::string_view name);
std::string_view to_string(PolicyKind policy);

enum class TaskKind { application, io };
enum class TaskLocation { none, global_queue, local_queue, running };

struct Task {
  TaskId id = 0;
  TaskKind kind = TaskKind::application;
  SimTime total_work;
  SimTime remaining_work;
  SimTime arrival;
  /// On-CPU time since the task was last enqueued.
  SimTime epoch_runtime;
  bool low_priority = false;
  RequestId request = 0;
  AppId app = 0;
  /// Core (or I/O core) whose stack received the request.
  CoreId rx_core = 0;
  bool rogue = false;
  bool started = false;
  TaskLocation where = TaskLocation::none;
};

/// Slab of live tasks with index reuse; ids stay valid until released.
class TaskPool {
 public:
  TaskId create(Task task);
  Task& operator[](TaskId id) { return tasks_[id]; }
  const Task& operator[](TaskId id) const { return tasks_[id]; }
  void release(TaskId id);
  std::size_t live() const { return tasks_.size() - free_.size(); }

 private:
  std::vector<Task> tasks_;
  std::vector<TaskId> free_;
};

/// Raised when a task is enqueued while already queued or running.
class QueueStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class PreemptTarget { global_queue, local_queue };

struct SchedulerParams {
  static constexpr std::uint32_t kUnbounded = std::numeric_limits<std::uint32_t>::max();

  /// N: tasks moved from the global queue per pull.
  std::uint32_t batch_pull_n = 1;
  /// T: on-CPU budget before a task is demoted; infinity disables preemption.
  SimTime quanta_t = SimTime::from_micros(10);
  SimTime preemption_interval = SimTime::from_micros(10);
  /// Packets handled per I/O slice.
  std::uint32_t io_batch = 32;
  PreemptTarget preempt_to = PreemptTarget::global_queue;

  void validate() const;
};

struct GlobalQueue {
  std::deque<TaskId> fifo;
  bool empty() const { return fifo.empty(); }
  std::size_t size() const { return fifo.size(); }
};

struct CoreState {
  CoreId id = 0;
  std::deque<TaskId> local_queue;
  std::optional<TaskId> running;
  EventHandle armed_timer;
  /// Set once the I/O thread has run ahead of a low-priority head task.
  bool io_ran_for_low_priority = false;
};

/// Appends a newly ready task to the global queue tail.
void on_task_ready(TaskPool& pool, TaskId task, GlobalQueue& global);
/// Appends a task to a core's local queue tail (decentralized baselines).
void enqueue_local(TaskPool& pool, TaskId task, CoreState& core);

/// Moves up to N tasks from the global head to the local tail. Requires an
/// empty local queue; returns the number moved.
std::size_t pull_from_global(CoreState& core, GlobalQueue& global, TaskPool& pool, const SchedulerParams& params);

struct Decision {
  enum class Kind { run_app, run_io, idle };
  enum class Reason { none, io_timer, low_priority_head, io_pending };
  Kind kind = Kind::idle;
  Reason reason = Reason::none;
  TaskId task = 0;
  /// Tasks moved from the global queue while deciding.
  std::size_t pulled = 0;
};

/// Chooses what a vacant core does next:
///  1. an expired I/O timer runs the I/O thread;
///  2. a normal-priority local head runs;
///  3. a low-priority local head lets pending I/O run first, then runs;
///  4. an empty local queue pulls from the global queue and retries;
///  5. otherwise pending packets run the I/O thread;
///  6. otherwise the core idles.
/// `global` is null for policies without a shared queue. A run_app
/// decision moves the task to core.running.
Decision pick_next(CoreState& core, TaskPool& pool, GlobalQueue* global, bool io_timer_expired, bool io_pending,
                   const SchedulerParams& params);

enum class ActivationOutcome { resume, preempt };

/// Called after a timer activation has been charged. The caller has
/// already credited the elapsed run to remaining_work and epoch_runtime.
/// On preempt the task leaves the core for the configured queue tail,
/// is marked low priority and its epoch resets.
ActivationOutcome on_timer_activation(CoreState& core, TaskPool& pool, GlobalQueue* global,
                                      const SchedulerParams& params);

/// Delay until the preemption timer should fire for a task about to run,
/// or infinity when preemption is disabled.
SimTime preemption_timer_delay(const Task& task, const SchedulerParams& params);

/// Work-stealing baseline: the thief scans the other cores round-robin from
/// its own position + 1 and takes the tail of the first non-empty local
/// queue. Returns the stolen task, which is now running on the thief.
std::optional<TaskId> steal_one(CoreState& thief, std::span<CoreState* const> cores, std::size_t thief_index,
                                TaskPool& pool);

/// Centralized baseline: index of the app core with the fewest queued plus
/// running tasks, lowest index on ties.
std::size_t least_loaded(std::span<const CoreState> cores);
std::size_t least_loaded(std::span<const CoreState* const> cores);

}  // namespace dpsim::sched
