#include "dpsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include "dpsim/simulator.hpp"

namespace dpsim {

ExperimentConfig with_load(const ExperimentConfig& cfg, double load_ops) {
  ExperimentConfig c = cfg;
  AppConfig& a = c.apps.at(c.sweep_app_index());
  a.load_ops = load_ops;
  a.load_gbps.reset();
  return c;
}

ExperimentConfig with_axis(const ExperimentConfig& cfg, SweepAxis axis, double value) {
  if (axis == SweepAxis::load) return with_load(cfg, value);
  ExperimentConfig c = cfg;
  const auto count = static_cast<std::uint32_t>(value);
  switch (axis) {
    case SweepAxis::cores:
      if (c.total_cores != 0 && c.apps.size() == 1) {
        c.total_cores = c.centralized() ? count + c.io_cores : count;
      } else {
        c.apps.at(c.sweep_app_index()).cores = count;
      }
      break;
    case SweepAxis::io_cores: c.io_cores = count; break;
    case SweepAxis::n: c.sched.batch_pull_n = count; break;
    case SweepAxis::t: c.sched.quanta_t = SimTime::from_micros_f(value); break;
    case SweepAxis::load: break;
  }
  c.validate();
  return c;
}

std::vector<RunPoint> expand_run(const ExperimentConfig& cfg) {
  std::vector<RunPoint> out;
  std::vector<std::optional<double>> loads;
  for (double l : cfg.loads) loads.emplace_back(l);
  if (loads.empty()) loads.emplace_back(std::nullopt);
  for (const auto& l : loads) {
    for (auto seed : cfg.seeds) {
      RunPoint p;
      p.config = l ? with_load(cfg, *l) : cfg;
      p.seed = seed;
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<RunPoint> expand_sweep(const ExperimentConfig& cfg, SweepAxis axis) {
  std::vector<double> values;
  switch (axis) {
    case SweepAxis::load: values = cfg.sweep.load; break;
    case SweepAxis::cores:
      for (auto v : cfg.sweep.cores) values.push_back(v);
      break;
    case SweepAxis::io_cores:
      for (auto v : cfg.sweep.io_cores) values.push_back(v);
      break;
    case SweepAxis::n:
      for (auto v : cfg.sweep.n) values.push_back(v);
      break;
    case SweepAxis::t:
      for (auto v : cfg.sweep.t) values.push_back(v.micros());
      break;
  }
  if (values.empty()) {
    throw ConfigError("sweep." + std::string(to_string(axis) == "t" ? "t_us" : to_string(axis)) +
                      ": no values to sweep");
  }
  std::vector<RunPoint> out;
  for (double v : values) {
    ExperimentConfig base = with_axis(cfg, axis, v);
    if (axis == SweepAxis::load) {
      base.loads.clear();
    }
    for (auto& p : expand_run(base)) {
      p.axis = axis;
      p.axis_value = v;
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<PointResult> run_points(const std::vector<RunPoint>& points, unsigned parallel) {
  std::vector<PointResult> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      try {
        results[i].point = points[i];
        results[i].summary = simulate(points[i].config, points[i].seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1U, std::min<unsigned>(parallel, static_cast<unsigned>(points.size())));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

namespace {

std::string fmt_value(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  (void)ec;
  return std::string(buf, p);
}

std::string point_label(const PointResult& r) {
  std::string label = r.point.config.experiment;
  if (r.point.axis) label += "[" + std::string(to_string(*r.point.axis)) + "=" + fmt_value(r.point.axis_value) + "]";
  return label;
}

}  // namespace

std::vector<CsvRow> csv_rows(const PointResult& r) {
  std::vector<CsvRow> rows;
  const std::string base = point_label(r);
  const bool multi = r.summary.apps.size() > 1;
  for (const auto& app : r.summary.apps) {
    rows.push_back(make_csv_row(multi ? base + ":" + app.name : base,
                                std::string(sched::to_string(r.point.config.policy)), r.point.seed, app));
  }
  return rows;
}

std::string sweep_csv_row(const PointResult& r) {
  const AppSummary& app = r.summary.apps.at(r.point.config.sweep_app_index());
  const std::uint64_t p99 = app.latency.empty() ? 0 : app.latency.percentile(99).nanos();
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%s,%llu,%s,%s,%.1f,%.1f,%llu,%llu,%llu,%llu,%llu", point_label(r).c_str(),
                std::string(sched::to_string(r.point.config.policy)).c_str(),
                static_cast<unsigned long long>(r.point.seed),
                r.point.axis ? std::string(to_string(*r.point.axis)).c_str() : "",
                fmt_value(r.point.axis_value).c_str(), app.offered_load_ops, app.throughput_ops,
                static_cast<unsigned long long>(p99), static_cast<unsigned long long>(app.pulls),
                static_cast<unsigned long long>(app.pull_charge.nanos()),
                static_cast<unsigned long long>(app.order_deviations), static_cast<unsigned long long>(app.steals));
  return buf;
}

namespace {

double analytic_capacity(const ExperimentConfig& cfg) {
  const std::size_t i = cfg.sweep_app_index();
  const AppConfig& a = cfg.apps.at(i);
  const double stack = static_cast<double>(cfg.cost.stack_time().nanos());
  const double hop = static_cast<double>(cfg.cost.overhead(OverheadKind::msg_hop).nanos());
  const double gate = static_cast<double>(cfg.cost.overhead(OverheadKind::gate_switch).nanos());
  const double cores = cfg.app_cores(i);
  if (cfg.centralized()) {
    const double io = cfg.io_cores * 1e9 / (stack + 2 * hop);
    const double app = cores * 1e9 / std::max(a.service.mean_ns(), 1.0);
    return std::min(io, app);
  }
  const double per_request = a.service.mean_ns() + stack + hop + (cfg.protection ? 2 * gate : 0.0);
  return cores * 1e9 / std::max(per_request, 1.0);
}

double peak_utilization(const SimSummary& s, std::size_t app) {
  double peak = 0.0;
  for (double u : s.apps.at(app).core_utilization) peak = std::max(peak, u);
  for (double u : s.io_core_utilization) peak = std::max(peak, u);
  return peak;
}

}  // namespace

double estimate_capacity(const ExperimentConfig& cfg, std::uint64_t seed) {
  const std::size_t idx = cfg.sweep_app_index();
  const SimSummary light = simulate(with_load(cfg, 0.5 * analytic_capacity(cfg)), seed);
  double cap = capacity_from_utilization(light, idx);
  if (cap <= 0.0) return 0.0;
  for (int probe = 0; probe < 4; ++probe) {
    const SimSummary s = simulate(with_load(cfg, 1.5 * cap), seed);
    const double tput = s.apps.at(idx).throughput_ops;
    const bool saturated = peak_utilization(s, idx) >= 0.95;
    cap = tput;
    if (saturated || cap <= 0.0) break;
  }
  return cap;
}

double saturation_throughput(const ExperimentConfig& cfg, std::uint64_t seed, double overload) {
  const double cap = estimate_capacity(cfg, seed);
  const SimSummary s = simulate(with_load(cfg, overload * cap), seed);
  return s.apps.at(cfg.sweep_app_index()).throughput_ops;
}

SloSearch max_load_under_slo(const ExperimentConfig& cfg, std::uint64_t seed, SimTime slo, double percentile) {
  SloSearch out;
  const std::size_t idx = cfg.sweep_app_index();
  const double cap = estimate_capacity(cfg, seed);
  auto meets = [&](double load) {
    ++out.probes;
    const SimSummary s = simulate(with_load(cfg, load), seed);
    const AppSummary& app = s.apps.at(idx);
    return !app.latency.empty() && app.latency.percentile(percentile) <= slo && !detect_saturation(app);
  };
  double lo = 0.01 * cap;
  if (!(cap > 0.0) || !meets(lo)) return out;
  out.attainable = true;
  double hi = cap;
  if (meets(hi)) {
    out.load_ops = hi;
    return out;
  }
  while ((hi - lo) / hi > 0.02) {
    const double mid = 0.5 * (lo + hi);
    if (meets(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.load_ops = lo;
  return out;
}

}  // namespace dpsim
