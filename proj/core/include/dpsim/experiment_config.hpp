#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpsim/cost_model.hpp"
#include "dpsim/scheduler.hpp"
#include "dpsim/sim_time.hpp"
#include "dpsim/stack_model.hpp"
#include "dpsim/workload.hpp"

namespace dpsim {

/// Invalid configuration. what() carries "source:line: key: message" when
/// the location is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AppConfig {
  std::string name;
  std::uint32_t cores = 1;
  double load_ops = 0.0;
  /// When set, the offered load is this bit rate in messages of msg_bytes.
  std::optional<double> load_gbps;
  std::uint32_t msg_bytes = 64;
  ServiceDist service = ServiceDist::exponential(SimTime::from_micros(5));
  stack::SteeringScheme steering = stack::SteeringScheme::rss_uniform;
  std::vector<double> weights;
  /// Fraction of requests whose task tries to read data-plane memory.
  double rogue_fraction = 0.0;

  double offered_load_ops() const;
};

enum class SweepAxis { load, cores, io_cores, n, t };

SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

struct SweepSpec {
  std::vector<double> load;
  std::vector<std::uint32_t> cores;
  std::vector<std::uint32_t> io_cores;
  std::vector<std::uint32_t> n;
  std::vector<SimTime> t;

  std::size_t size(SweepAxis axis) const;
  std::vector<SweepAxis> present() const;
};

struct ExperimentConfig {
  std::string experiment = "custom";
  sched::PolicyKind policy = sched::PolicyKind::cygnus;
  sched::SchedulerParams sched;
  CostModel cost;
  /// Which overhead a timer activation costs: activation, posix_signal or ipi.
  OverheadKind activation = OverheadKind::activation;
  /// Dedicated stack cores of the centralized policy.
  std::uint32_t io_cores = 0;
  /// When non-zero, a single-app centralized run gets total_cores - io_cores
  /// app cores and a decentralized run gets total_cores cores.
  std::uint32_t total_cores = 0;
  /// Charge data-plane call gates on the send path.
  bool protection = true;
  std::size_t rx_capacity = stack::RxQueue::kUnbounded;
  /// Period of the per-core protocol timer; zero disables it.
  SimTime timer_period = SimTime::zero();
  bool check_invariants = false;

  std::vector<AppConfig> apps;
  SimTime duration = SimTime::from_millis(100);
  std::optional<SimTime> warmup;
  /// Keep running after arrivals stop until every request has finished.
  bool drain = false;
  SimTime rtt = SimTime::zero();

  std::vector<std::uint64_t> seeds{1};
  /// Offered loads for the swept app; empty means its configured load.
  std::vector<double> loads;
  std::string sweep_app;
  SweepSpec sweep;
  std::string out;

  SimTime warmup_time() const;
  std::size_t sweep_app_index() const;
  bool centralized() const { return policy == sched::PolicyKind::centralized; }
  /// App cores of app i after total_cores is applied.
  std::uint32_t app_cores(std::size_t i) const;

  /// Throws ConfigError describing the first problem found.
  void validate() const;
};

/// Parses "constant(1)", "uniform(2.5)", "exponential(5)" or
/// "bimodal(0.005,1,1000)"; all times in microseconds.
ServiceDist parse_service(std::string_view text);
std::string render_service(const ServiceDist& dist);

/// Named experiment presets. Throws ConfigError for an unknown name.
ExperimentConfig build_experiment(std::string_view name);
std::vector<std::string> preset_names();

/// Reads a TOML-style or JSON (by .json extension) config file.
ExperimentConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config_text(std::string_view text, std::string_view source, bool json,
                                  const std::vector<std::string>& overrides = {});
/// Canonical TOML rendering; load_config_text(render_config(c)) reproduces c.
std::string render_config(const ExperimentConfig& config);

}  // namespace dpsim
