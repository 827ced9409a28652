#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "dpsim/sim_time.hpp"

namespace dpsim {

/// Log-linear latency histogram. Values below 256 ns are kept exactly;
/// above that each power of two is split into 128 buckets, so a bucket is
/// never wider than 1/128 (0.78%) of its lower bound.
class LatencyHistogram {
 public:
  void record(SimTime latency);
  void merge(const LatencyHistogram& other);

  std::uint64_t count() const { return count_; }
  bool empty() const { return count_ == 0; }
  /// Exact sum of recorded values in nanoseconds.
  unsigned __int128 sum_ns() const { return sum_; }
  double mean_ns() const;
  SimTime min() const { return SimTime::from_nanos(min_); }
  SimTime max() const { return SimTime::from_nanos(max_); }

  /// Nearest-rank percentile, 0 < p < 100. Returns the centre of the bucket
  /// holding the order statistic, clamped to the observed range. Throws
  /// std::invalid_argument on an empty histogram or p outside (0, 100).
  SimTime percentile(double p) const;

  static std::size_t bucket_of(std::uint64_t ns);
  static std::uint64_t bucket_lower(std::size_t index);
  static std::uint64_t bucket_width(std::size_t index);

  bool operator==(const LatencyHistogram&) const = default;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t count_ = 0;
  unsigned __int128 sum_ = 0;
  std::uint64_t min_ = ~std::uint64_t{0};
  std::uint64_t max_ = 0;
};

struct AppSummary {
  std::string name;
  double offered_load_ops = 0.0;
  std::uint64_t arrivals = 0;
  std::uint64_t completions = 0;
  /// Completions inside the measurement window.
  std::uint64_t window_completions = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t rx_drops = 0;
  std::uint64_t violations = 0;
  double throughput_ops = 0.0;
  LatencyHistogram latency;
  std::uint64_t activations = 0;
  std::uint64_t preemptions = 0;
  /// Activations that found no running application task.
  std::uint64_t stray_activations = 0;
  std::uint64_t io_timers_serviced = 0;
  std::uint64_t pulls = 0;
  SimTime pull_charge;
  std::uint64_t steals = 0;
  /// First starts that skipped an older, not yet started request.
  std::uint64_t order_deviations = 0;
  std::uint64_t first_starts = 0;
  std::vector<double> core_utilization;
  double util_mean = 0.0;
  /// Busy time summed over the app's cores for the whole run.
  SimTime busy_total;
  /// Time-weighted mean number of in-flight requests over the window.
  double mean_in_flight = 0.0;
  /// In-flight count sampled on a fixed grid across the run.
  std::vector<std::uint64_t> in_flight_samples;
};

struct SimSummary {
  std::vector<AppSummary> apps;
  /// Utilisation of dedicated I/O cores (centralized policy only).
  std::vector<double> io_core_utilization;
  SimTime io_busy_total;
  std::uint64_t events = 0;
  SimTime end_time;
  SimTime window_start;
  SimTime window_end;
  /// Longest stretch an application task ran without a scheduling decision.
  SimTime max_uninterrupted_run;
  std::uint64_t gate_enters = 0;
  std::uint64_t gate_exits = 0;
  std::uint64_t io_timers_serviced = 0;
  /// Largest gap between a protocol timer's deadline and the end of its service.
  SimTime max_timer_lateness;
  /// Checked-mode count of events after which a core idled beside a non-empty
  /// global queue.
  std::uint64_t work_conservation_breaches = 0;

  const AppSummary& app(std::string_view name) const;
};

/// True when the in-flight population keeps growing: the mean of the last
/// quarter of samples exceeds twice the first-half mean (floored at one).
bool detect_saturation(const AppSummary& app);

/// Measured throughput (offered load if none) over the peak core
/// utilisation: the load at which the busiest core of the app, or of the
/// shared I/O cores, would reach 100%.
double capacity_from_utilization(const SimSummary& summary, std::size_t app_index);

// --- CSV -------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader =
    "experiment,policy,seed,offered_load_ops,throughput_ops,mean_ns,p50_ns,p99_ns,p999_ns,activations,"
    "preemptions,violations,util_mean";

struct CsvRow {
  std::string experiment;
  std::string policy;
  std::uint64_t seed = 0;
  double offered_load_ops = 0.0;
  double throughput_ops = 0.0;
  std::uint64_t mean_ns = 0;
  std::uint64_t p50_ns = 0;
  std::uint64_t p99_ns = 0;
  std::uint64_t p999_ns = 0;
  std::uint64_t activations = 0;
  std::uint64_t preemptions = 0;
  std::uint64_t violations = 0;
  double util_mean = 0.0;
};

CsvRow make_csv_row(std::string experiment, std::string policy, std::uint64_t seed, const AppSummary& app);
std::string format_csv_row(const CsvRow& row);
void write_csv(std::ostream& os, const std::vector<CsvRow>& rows);

}  // namespace dpsim
