#include "dpsim/simulator.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "dpsim/cost_model.hpp"
#include "dpsim/protection.hpp"
#include "dpsim/rng.hpp"
#include "dpsim/scheduler.hpp"
#include "dpsim/stack_model.hpp"
#include "dpsim/workload.hpp"

namespace dpsim {
namespace {

using sched::PolicyKind;

constexpr std::uint64_t kEntryGate = 0x7f00'0000'1000ULL;
constexpr std::uint64_t kExitGate = 0x7f00'0000'2000ULL;
constexpr std::uint64_t kRogueRip = 0x0040'1337ULL;
constexpr std::size_t kSamples = 64;

enum class Step { none, io_packet, io_timer, io_end, send_path, activation, charge, central_rx, central_tx };

struct CentralItem {
  bool tx = false;
  stack::Packet packet;
  TaskId task = 0;
};

struct Core {
  sched::CoreState st;
  AppId app = 0;
  bool io_core = false;
  stack::RxQueue rx;
  protection::PkruState pkru = protection::PkruState::application_default();
  protection::DomainContext dom;

  bool busy = false;
  SimTime busy_since;
  SimTime busy_window;
  SimTime busy_total;

  Step step = Step::none;
  std::vector<stack::Packet> slice;
  std::size_t slice_next = 0;
  std::vector<TaskId> produced;
  TimerId step_timer = 0;
  TaskId step_task = 0;
  bool interrupt_for_io = false;

  SimTime run_started;
  EventHandle completion_ev;

  std::deque<CentralItem> items;
  std::deque<CentralItem> tx_items;
  std::size_t rx_items = 0;
  CentralItem current;
};

struct App {
  App(const AppConfig& c, std::size_t targets, std::uint64_t seed, AppId id, SimTime horizon)
      : cfg(&c),
        service(c.service),
        steering(c.steering, targets, c.weights),
        service_rng(seed, stream_id_for(id, StreamRole::service)),
        steering_rng(seed, stream_id_for(id, StreamRole::steering)),
        rogue_rng(seed, stream_id_for(id, StreamRole::rogue)),
        gen(c.offered_load_ops(), horizon, RngStream(seed, stream_id_for(id, StreamRole::arrivals))) {}

  const AppConfig* cfg;
  AppSummary sum;
  std::vector<CoreId> cores;
  std::vector<sched::CoreState*> states;
  std::vector<const sched::CoreState*> const_states;
  sched::GlobalQueue global;
  ServiceDist service;
  stack::Steering steering;
  RngStream service_rng;
  RngStream steering_rng;
  RngStream rogue_rng;
  ArrivalGenerator gen;
  std::optional<SimTime> next_arrival;
  const std::vector<SimTime>* trace = nullptr;
  std::size_t trace_pos = 0;
  RequestId next_request = 0;
  std::uint64_t in_flight = 0;
  std::vector<bool> started;
  RequestId lowest_unstarted = 0;
  long double area = 0;
  SimTime last_change;

  std::optional<SimTime> pull_arrival() {
    if (!trace) return gen.next();
    if (trace_pos < trace->size()) return (*trace)[trace_pos++];
    return std::nullopt;
  }
};

class Simulator {
 public:
  Simulator(const ExperimentConfig& cfg, std::uint64_t seed, const SimOptions& opt)
      : cfg_(cfg), opt_(opt), policy_(cfg.policy), params_(cfg.sched) {
    const CostModel& k = cfg.cost;
    hop_ = k.overhead(OverheadKind::msg_hop);
    rx_t_ = k.rx_stack_time();
    tx_t_ = k.tx_stack_time();
    gate_ = k.overhead(OverheadKind::gate_switch);
    act_ = k.overhead(cfg.activation);
    ws_ = cfg.warmup_time();
    we_ = cfg.duration;
    if (policy_ != PolicyKind::cygnus) params_.quanta_t = SimTime::infinity();
    gates_ = protection::ControlPlane::make_gates(kEntryGate, kExitGate);
    protection_ = cfg.protection && !centralized();
    timers_on_ = cfg.timer_period != SimTime::zero() && !centralized();

    std::size_t total = centralized() ? cfg.io_cores : 0;
    for (std::size_t i = 0; i < cfg.apps.size(); ++i) total += cfg.app_cores(i);
    cores_.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
      cores_[i].st.id = static_cast<CoreId>(i);
      cores_[i].rx = stack::RxQueue(cfg.rx_capacity);
    }
    CoreId next = 0;
    if (centralized()) {
      for (; next < cfg.io_cores; ++next) cores_[next].io_core = true;
    }
    apps_.reserve(cfg.apps.size());
    for (std::size_t i = 0; i < cfg.apps.size(); ++i) {
      const std::uint32_t n = cfg.app_cores(i);
      apps_.emplace_back(cfg.apps[i], centralized() ? cfg.io_cores : n, seed, static_cast<AppId>(i), cfg.duration);
      App& a = apps_.back();
      a.sum.name = cfg.apps[i].name;
      a.sum.offered_load_ops = cfg.apps[i].offered_load_ops();
      for (std::uint32_t j = 0; j < n; ++j, ++next) {
        cores_[next].app = static_cast<AppId>(i);
        a.cores.push_back(next);
        a.states.push_back(&cores_[next].st);
        a.const_states.push_back(&cores_[next].st);
      }
    }
  }

  SimSummary run() {
    engine_.schedule(cfg_.duration, events::ExperimentEnd{});
    for (std::size_t i = 0; i < apps_.size(); ++i) {
      if (i < opt_.arrival_trace.size() && opt_.arrival_trace[i]) {
        const auto& tr = *opt_.arrival_trace[i];
        if (!std::is_sorted(tr.begin(), tr.end()) || (!tr.empty() && tr.back() >= cfg_.duration)) {
          throw std::invalid_argument("arrival trace must be sorted and end before the run duration");
        }
        apps_[i].trace = &tr;
      }
      apps_[i].next_arrival = apps_[i].pull_arrival();
    }
    if (timers_on_) {
      for (auto& c : cores_) {
        if (!c.io_core) register_timer(c.st.id, cfg_.timer_period);
      }
    }
    bool ended = false;
    for (;;) {
      const SimTime na = earliest_arrival();
      const auto ne = engine_.next_time();
      if (!na.is_infinite() && (!ne || na <= *ne)) materialize(na);
      auto ev = engine_.pop();
      if (!ev) break;
      ++events_;
      take_samples(ev->fire_at);
      if (std::holds_alternative<events::ExperimentEnd>(ev->kind)) {
        ended = true;
        if (!cfg_.drain) break;
        continue;
      }
      std::visit([this](const auto& e) { handle(e); }, ev->kind);
      if (cfg_.check_invariants) check_work_conservation();
    }
    (void)ended;
    return finalize();
  }

 private:
  bool centralized() const { return policy_ == PolicyKind::centralized; }
  SimTime now() const { return engine_.now(); }

  // --- event plumbing -----------------------------------------------------------

  SimTime earliest_arrival() const {
    SimTime best = SimTime::infinity();
    for (const auto& a : apps_) {
      if (a.next_arrival && *a.next_arrival < best) best = *a.next_arrival;
    }
    return best;
  }

  // Arrivals are scheduled before any other event at or after their time,
  // so on equal timestamps an arrival is always seen first.
  void materialize(SimTime upto) {
    for (;;) {
      App* pick = nullptr;
      for (auto& a : apps_) {
        if (a.next_arrival && *a.next_arrival <= upto && (!pick || *a.next_arrival < *pick->next_arrival)) pick = &a;
      }
      if (!pick) return;
      const auto id = static_cast<AppId>(pick - apps_.data());
      engine_.schedule(*pick->next_arrival, events::Arrival{id, pick->next_request++});
      pick->next_arrival = pick->pull_arrival();
    }
  }

  EventHandle schedule(SimTime at, EventKind kind) {
    materialize(at);
    return engine_.schedule(at, std::move(kind));
  }

  void run_step(Core& c, SimTime end, Step step) {
    if (end == now()) {
      complete_step(c, step);
      return;
    }
    c.step = step;
    schedule(end, events::CoreStep{c.st.id});
  }

  void set_busy(Core& c, bool busy) {
    if (busy == c.busy) return;
    if (busy) {
      c.busy_since = now();
    } else {
      account(c, c.busy_since, now());
    }
    c.busy = busy;
  }

  void account(Core& c, SimTime from, SimTime to) {
    c.busy_total += to - from;
    const SimTime lo = max(from, ws_);
    const SimTime hi = min(to, we_);
    if (hi > lo) c.busy_window += hi - lo;
  }

  void change_in_flight(App& a, int delta) {
    const SimTime lo = max(a.last_change, ws_);
    const SimTime hi = min(now(), we_);
    if (hi > lo) a.area += static_cast<long double>(a.in_flight) * static_cast<long double>((hi - lo).nanos());
    a.last_change = now();
    a.in_flight = delta < 0 ? a.in_flight - 1 : a.in_flight + static_cast<std::uint64_t>(delta);
  }

  void take_samples(SimTime t) {
    while (sample_k_ < kSamples) {
      const SimTime at = SimTime::from_nanos(static_cast<std::uint64_t>(
          static_cast<unsigned __int128>(cfg_.duration.nanos()) * (2 * sample_k_ + 1) / (2 * kSamples)));
      if (at >= t) return;
      for (auto& a : apps_) a.sum.in_flight_samples.push_back(a.in_flight);
      ++sample_k_;
    }
  }

  void mark_started(App& a, RequestId r, bool first_start) {
    if (r >= a.started.size()) a.started.resize(std::max<std::size_t>(r + 1, a.started.size() * 2), false);
    if (first_start) {
      ++a.sum.first_starts;
      if (r > a.lowest_unstarted) ++a.sum.order_deviations;
    }
    a.started[r] = true;
    while (a.lowest_unstarted < a.started.size() && a.started[a.lowest_unstarted]) ++a.lowest_unstarted;
  }

  // --- handlers -------------------------------------------------------------------

  void handle(const events::ExperimentEnd&) {}

  void handle(const events::Arrival& ev) {
    App& a = apps_[ev.app];
    ++a.sum.arrivals;
    change_in_flight(a, +1);
    stack::Packet p;
    p.request = ev.request;
    p.arrival = now();
    p.size_bytes = a.cfg->msg_bytes;
    p.app = ev.app;
    p.work = a.service.sample(a.service_rng);
    p.rogue = a.cfg->rogue_fraction > 0.0 && sample_bernoulli(a.rogue_rng, a.cfg->rogue_fraction);
    const std::size_t target = a.steering.steer(a.steering_rng);
    if (centralized()) {
      Core& io = cores_[target];
      p.steered_core = io.st.id;
      if (io.rx_items >= cfg_.rx_capacity) {
        drop(a, p.request);
        return;
      }
      io.items.push_back(CentralItem{false, p, 0});
      ++io.rx_items;
      if (!io.busy) central_next(io);
      return;
    }
    Core& c = cores_[a.cores[target]];
    p.steered_core = c.st.id;
    if (!c.rx.push(p)) {
      drop(a, p.request);
      return;
    }
    if (!c.busy) decide(c);
  }

  void drop(App& a, RequestId r) {
    ++a.sum.rx_drops;
    change_in_flight(a, -1);
    mark_started(a, r, false);
  }

  void handle(const events::CoreStep& ev) {
    Core& c = cores_[ev.core];
    const Step s = c.step;
    c.step = Step::none;
    complete_step(c, s);
  }

  void complete_step(Core& c, Step s) {
    switch (s) {
      case Step::io_packet:
        process_packet(c);
        io_continue(c, now());
        return;
      case Step::io_timer:
        service_timer(c);
        io_continue(c, now());
        return;
      case Step::io_end: finish_slice(c); return;
      case Step::send_path: finish_send(c); return;
      case Step::activation: after_activation(c); return;
      case Step::charge: decide(c); return;
      case Step::central_rx: central_rx_done(c); return;
      case Step::central_tx: central_tx_done(c); return;
      case Step::none: return;
    }
  }

  // --- decentralized cores --------------------------------------------------------

  void decide(Core& c) {
    App& a = apps_[c.app];
    const bool timer_expired = timers_on_ && timers_.has_expired_on(c.st.id);
    sched::GlobalQueue* g = policy_ == PolicyKind::cygnus ? &a.global : nullptr;
    const auto d = sched::pick_next(c.st, pool_, g, timer_expired, !c.rx.empty(), params_);
    SimTime t0 = now();
    if (d.pulled > 0) {
      ++a.sum.pulls;
      a.sum.pull_charge += hop_;
      t0 += hop_;
    }
    switch (d.kind) {
      case sched::Decision::Kind::run_app:
        set_busy(c, true);
        start_app(c, t0);
        return;
      case sched::Decision::Kind::run_io:
        set_busy(c, true);
        start_io(c, t0);
        return;
      case sched::Decision::Kind::idle: break;
    }
    if (policy_ == PolicyKind::stealing) {
      const std::size_t idx = static_cast<std::size_t>(
          std::find(a.cores.begin(), a.cores.end(), c.st.id) - a.cores.begin());
      if (sched::steal_one(c.st, a.states, idx, pool_)) {
        ++a.sum.steals;
        set_busy(c, true);
        start_app(c, now() + hop_);
        return;
      }
    }
    set_busy(c, false);
  }

  void wake_idle(App& a) {
    if (policy_ == PolicyKind::cygnus) {
      for (CoreId id : a.cores) {
        if (a.global.empty()) return;
        if (!cores_[id].busy) decide(cores_[id]);
      }
    } else if (policy_ == PolicyKind::stealing) {
      for (CoreId id : a.cores) {
        if (!cores_[id].busy) decide(cores_[id]);
      }
    }
  }

  // A rogue task issues WRPKRU outside the gates and then reads data-plane
  // memory. Returns true when the read is refused.
  bool rogue_attack(Core& c) {
    const protection::WrpkruAttempt attempt{kRogueRip, 0U, 0U, 0U};
    const auto result = protection::wrpkru(c.pkru, attempt, gates_);
    if (std::holds_alternative<protection::GeneralProtectionFault>(result)) return true;
    const auto after = std::get<protection::PkruState>(result);
    if (after.ckey_bits() != c.pkru.ckey_bits()) throw InvariantError("data-plane key changed outside the gates");
    c.pkru = after;
    return !protection::check_access(after, protection::kDataPlaneKey, protection::AccessKind::read);
  }

  void start_app(Core& c, SimTime t0) {
    const TaskId id = *c.st.running;
    sched::Task& t = pool_[id];
    App& a = apps_[t.app];
    if (!t.started) {
      t.started = true;
      mark_started(a, t.request, true);
      if (t.rogue && rogue_attack(c)) {
        ++a.sum.violations;
        change_in_flight(a, -1);
        c.st.running.reset();
        pool_.release(id);
        run_step(c, t0, Step::charge);
        return;
      }
    }
    if (c.dom.mode != protection::DomainMode::application) {
      throw InvariantError("application work consumed in data-plane mode");
    }
    c.run_started = t0;
    c.completion_ev = schedule(t0 + t.remaining_work, events::TaskCompletion{c.st.id, id});
    if (!params_.quanta_t.is_infinite()) {
      const SimTime delay = sched::preemption_timer_delay(t, params_);
      if (delay < t.remaining_work) c.st.armed_timer = schedule(t0 + delay, events::PreemptionTimerFire{c.st.id});
    }
  }

  // Credits the run since the last start to the running task.
  void credit_run(Core& c) {
    sched::Task& t = pool_[*c.st.running];
    const SimTime ran = now() - c.run_started;
    t.remaining_work -= ran;
    t.epoch_runtime += ran;
    max_run_ = max(max_run_, ran);
  }

  void cancel_preemption_timer(Core& c) {
    engine_.cancel(c.st.armed_timer);
    c.st.armed_timer = EventHandle{};
  }

  void handle(const events::TaskCompletion& ev) {
    Core& c = cores_[ev.core];
    const TaskId id = ev.task;
    sched::Task& t = pool_[id];
    c.completion_ev = EventHandle{};
    credit_run(c);
    if (t.remaining_work != SimTime::zero()) throw InvariantError("task completed with work left");
    cancel_preemption_timer(c);
    c.st.running.reset();
    t.where = sched::TaskLocation::none;
    if (centralized()) {
      Core& io = cores_[t.rx_core];
      io.tx_items.push_back(CentralItem{true, {}, id});
      if (!io.busy) central_next(io);
      decide(c);
      return;
    }
    c.step_task = id;
    SimTime cost = tx_t_;
    if (protection_) {
      const auto x = protection::dpcall_enter(c.dom, gates_, c.pkru, id);
      c.dom = x.context;
      c.pkru = x.state;
      ++gate_enters_;
      cost = gate_ + tx_t_ + gate_;
    }
    run_step(c, now() + cost, Step::send_path);
  }

  void finish_send(Core& c) {
    if (protection_) {
      const auto x = protection::dpcall_exit(c.dom, gates_, c.pkru);
      c.dom = x.context;
      c.pkru = x.state;
      ++gate_exits_;
    }
    finish_request(c.step_task, c.st.id);
    decide(c);
  }

  void finish_request(TaskId id, CoreId core) {
    const sched::Task& t = pool_[id];
    App& a = apps_[t.app];
    const SimTime latency = stack::tx_complete(t, now(), ws_, cfg_.rtt, a.sum.latency);
    ++a.sum.completions;
    if (now() >= ws_ && now() < we_) ++a.sum.window_completions;
    change_in_flight(a, -1);
    if (opt_.on_complete) opt_.on_complete(CompletionRecord{t.app, t.request, t.arrival, now(), core, latency});
    pool_.release(id);
  }

  void handle(const events::PreemptionTimerFire& ev) {
    Core& c = cores_[ev.core];
    c.st.armed_timer = EventHandle{};
    App& a = apps_[c.app];
    if (!c.st.running || c.step != Step::none) {
      ++a.sum.stray_activations;
      return;
    }
    credit_run(c);
    engine_.cancel(c.completion_ev);
    c.completion_ev = EventHandle{};
    ++a.sum.activations;
    run_step(c, now() + act_, Step::activation);
  }

  void after_activation(Core& c) {
    const TaskId id = *c.st.running;
    App& a = apps_[pool_[id].app];
    if (c.interrupt_for_io) {
      // The interrupted task keeps its place and priority.
      c.interrupt_for_io = false;
      c.st.running.reset();
      pool_[id].where = sched::TaskLocation::local_queue;
      c.st.local_queue.push_front(id);
      decide(c);
      return;
    }
    sched::GlobalQueue* g = policy_ == PolicyKind::cygnus ? &a.global : nullptr;
    if (sched::on_timer_activation(c.st, pool_, g, params_) == sched::ActivationOutcome::resume) {
      start_app(c, now());
      return;
    }
    ++a.sum.preemptions;
    decide(c);
    wake_idle(a);
  }

  void start_io(Core& c, SimTime t0) {
    c.slice = c.rx.poll(params_.io_batch);
    c.slice_next = 0;
    c.produced.clear();
    io_continue(c, t0);
  }

  void io_continue(Core& c, SimTime t) {
    if (timers_on_ && timers_.has_expired_on(c.st.id)) {
      c.step_timer = timers_.expired_on(c.st.id).front();
      run_step(c, t + rx_t_, Step::io_timer);
      return;
    }
    if (c.slice_next < c.slice.size()) {
      run_step(c, t + rx_t_, Step::io_packet);
      return;
    }
    if (t > now()) {
      run_step(c, t, Step::io_end);
      return;
    }
    finish_slice(c);
  }

  void process_packet(Core& c) {
    const stack::Packet& p = c.slice[c.slice_next++];
    c.produced.push_back(pool_.create(stack::make_task(p)));
  }

  void finish_slice(Core& c) {
    App& a = apps_[c.app];
    const bool any = !c.produced.empty();
    for (TaskId id : c.produced) {
      if (policy_ == PolicyKind::cygnus) {
        sched::on_task_ready(pool_, id, a.global);
      } else {
        sched::enqueue_local(pool_, id, c.st);
      }
    }
    c.produced.clear();
    c.slice.clear();
    c.slice_next = 0;
    decide(c);
    if (any) wake_idle(a);
  }

  // --- protocol timers --------------------------------------------------------------

  void register_timer(CoreId core, SimTime deadline) {
    const TimerId id = timers_.register_timer(now(), deadline, "retransmission", core);
    timers_.at(id).event = schedule(deadline, events::IoTimerFire{id});
  }

  void handle(const events::IoTimerFire& ev) {
    if (!timers_.expire(ev.timer)) return;
    Core& c = cores_[timers_.at(ev.timer).core];
    if (!c.busy) {
      decide(c);
      return;
    }
    if (policy_ == PolicyKind::cygnus && c.st.running && c.step == Step::none) {
      App& a = apps_[c.app];
      credit_run(c);
      engine_.cancel(c.completion_ev);
      c.completion_ev = EventHandle{};
      cancel_preemption_timer(c);
      ++a.sum.activations;
      c.interrupt_for_io = true;
      run_step(c, now() + act_, Step::activation);
    }
  }

  void service_timer(Core& c) {
    const TimerId id = c.step_timer;
    timers_.mark_serviced(id, now());
    const SimTime deadline = timers_.at(id).deadline;
    max_lateness_ = max(max_lateness_, now() - deadline);
    ++timers_serviced_;
    ++apps_[c.app].sum.io_timers_serviced;
    const SimTime next = max(deadline + cfg_.timer_period, now());
    if (next < cfg_.duration) register_timer(c.st.id, next);
  }

  // --- centralized I/O cores ------------------------------------------------------

  // Transmit work is served ahead of receive work.
  void central_next(Core& io) {
    if (io.items.empty() && io.tx_items.empty()) {
      set_busy(io, false);
      return;
    }
    set_busy(io, true);
    auto& q = io.tx_items.empty() ? io.items : io.tx_items;
    io.current = q.front();
    q.pop_front();
    if (io.current.tx) {
      run_step(io, now() + hop_ + tx_t_, Step::central_tx);
    } else {
      --io.rx_items;
      run_step(io, now() + rx_t_ + hop_, Step::central_rx);
    }
  }

  void central_rx_done(Core& io) {
    const stack::Packet p = io.current.packet;
    io.current = CentralItem{};
    App& a = apps_[p.app];
    const TaskId id = pool_.create(stack::make_task(p));
    const std::size_t k = sched::least_loaded(a.const_states);
    Core& target = cores_[a.cores[k]];
    sched::enqueue_local(pool_, id, target.st);
    if (!target.busy) decide(target);
    central_next(io);
  }

  void central_tx_done(Core& io) {
    finish_request(io.current.task, io.st.id);
    io.current = CentralItem{};
    central_next(io);
  }

  // --- checks and results -----------------------------------------------------------

  void check_work_conservation() {
    if (policy_ != PolicyKind::cygnus) return;
    for (const auto& a : apps_) {
      if (a.global.empty()) continue;
      for (CoreId id : a.cores) {
        if (!cores_[id].busy) {
          ++breaches_;
          return;
        }
      }
    }
  }

  SimSummary finalize() {
    SimSummary s;
    const SimTime window = we_ - ws_;
    const double wsec = window.seconds();
    std::uint64_t live_packets = 0;
    for (auto& c : cores_) {
      if (c.busy) account(c, c.busy_since, now());
      live_packets += c.rx.size() + (c.slice.size() - c.slice_next) + c.rx_items;
      if (c.step == Step::central_rx) ++live_packets;
    }
    std::uint64_t in_flight = 0;
    for (auto& a : apps_) {
      change_in_flight(a, 0);
      AppSummary& r = a.sum;
      r.in_flight = a.in_flight;
      in_flight += a.in_flight;
      r.throughput_ops = wsec > 0 ? static_cast<double>(r.window_completions) / wsec : 0.0;
      r.mean_in_flight = window.nanos() > 0 ? static_cast<double>(a.area / window.nanos()) : 0.0;
      double util_sum = 0.0;
      for (CoreId id : a.cores) {
        const double u = wsec > 0 ? cores_[id].busy_window.seconds() / wsec : 0.0;
        r.core_utilization.push_back(u);
        util_sum += u;
        r.busy_total += cores_[id].busy_total;
      }
      r.util_mean = a.cores.empty() ? 0.0 : util_sum / static_cast<double>(a.cores.size());
      if (r.arrivals != r.completions + r.in_flight + r.violations + r.rx_drops) {
        throw InvariantError("conservation broken for app " + r.name + ": " + std::to_string(r.arrivals) +
                             " arrivals vs " + std::to_string(r.completions) + " completed + " +
                             std::to_string(r.in_flight) + " in flight + " + std::to_string(r.violations) +
                             " violations + " + std::to_string(r.rx_drops) + " dropped");
      }
      s.apps.push_back(std::move(r));
    }
    if (in_flight != pool_.live() + live_packets) {
      throw InvariantError("in-flight count " + std::to_string(in_flight) + " disagrees with " +
                           std::to_string(pool_.live() + live_packets) + " live requests");
    }
    for (const auto& c : cores_) {
      if (!c.io_core) continue;
      s.io_core_utilization.push_back(wsec > 0 ? c.busy_window.seconds() / wsec : 0.0);
      s.io_busy_total += c.busy_total;
    }
    if (cfg_.drain && in_flight == 0 && gate_enters_ != gate_exits_) {
      throw InvariantError("unbalanced data-plane call gates at quiescence");
    }
    s.events = events_;
    s.end_time = now();
    s.window_start = ws_;
    s.window_end = we_;
    s.max_uninterrupted_run = max_run_;
    s.gate_enters = gate_enters_;
    s.gate_exits = gate_exits_;
    s.io_timers_serviced = timers_serviced_;
    s.max_timer_lateness = max_lateness_;
    s.work_conservation_breaches = breaches_;
    return s;
  }

  const ExperimentConfig& cfg_;
  const SimOptions& opt_;
  PolicyKind policy_;
  sched::SchedulerParams params_;
  SimTime hop_, rx_t_, tx_t_, gate_, act_;
  SimTime ws_, we_;
  protection::GateRegisters gates_;
  bool protection_ = true;
  bool timers_on_ = false;

  Engine engine_;
  sched::TaskPool pool_;
  stack::IoTimerTable timers_;
  std::vector<Core> cores_;
  std::vector<App> apps_;

  std::size_t sample_k_ = 0;
  std::uint64_t events_ = 0;
  std::uint64_t gate_enters_ = 0;
  std::uint64_t gate_exits_ = 0;
  std::uint64_t timers_serviced_ = 0;
  std::uint64_t breaches_ = 0;
  SimTime max_run_;
  SimTime max_lateness_;
};

}  // namespace

SimSummary simulate(const ExperimentConfig& config, std::uint64_t seed, const SimOptions& options) {
  Simulator sim(config, seed, options);
  return sim.run();
}

}  // namespace dpsim
