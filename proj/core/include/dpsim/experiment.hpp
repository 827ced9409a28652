#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpsim/experiment_config.hpp"
#include "dpsim/metrics.hpp"

namespace dpsim {

/// One seeded simulation of a fully resolved config.
struct RunPoint {
  ExperimentConfig config;
  std::uint64_t seed = 1;
  /// Value of the swept axis, when the point belongs to a sweep.
  std::optional<SweepAxis> axis;
  double axis_value = 0.0;
};

struct PointResult {
  RunPoint point;
  SimSummary summary;
};

/// Copy of cfg with the swept app's offered load replaced.
ExperimentConfig with_load(const ExperimentConfig& cfg, double load_ops);
/// Copy of cfg with one sweep axis set to value.
ExperimentConfig with_axis(const ExperimentConfig& cfg, SweepAxis axis, double value);

/// loads x seeds, in that nesting order.
std::vector<RunPoint> expand_run(const ExperimentConfig& cfg);
/// axis values x loads x seeds. Throws ConfigError when the axis has no values.
std::vector<RunPoint> expand_sweep(const ExperimentConfig& cfg, SweepAxis axis);

/// Runs every point on up to `parallel` worker threads. Results keep the
/// order of `points` whatever order the runs finish in.
std::vector<PointResult> run_points(const std::vector<RunPoint>& points, unsigned parallel);

/// One CSV row per app per point. Multi-app points label rows
/// "experiment:app"; sweep points append "[axis=value]".
std::vector<CsvRow> csv_rows(const PointResult& result);

/// Extra per-point columns for sweeps: pull count and charge, ordering
/// deviations and steals of the swept app.
inline constexpr std::string_view kSweepCsvHeader =
    "experiment,policy,seed,axis,value,offered_load_ops,throughput_ops,p99_ns,pulls,pull_charge_ns,"
    "order_deviations,steals";
std::string sweep_csv_row(const PointResult& result);

/// Completion rate of the swept app under 1.5x overload, starting from a
/// utilisation-based guess at half the analytic capacity.
double estimate_capacity(const ExperimentConfig& cfg, std::uint64_t seed);

/// Completion rate of the swept app when offered `overload` x its capacity
/// estimate.
double saturation_throughput(const ExperimentConfig& cfg, std::uint64_t seed, double overload = 1.5);

struct SloSearch {
  bool attainable = false;
  double load_ops = 0.0;
  int probes = 0;
};

/// Highest offered load whose p-th percentile latency stays within slo,
/// by bisection to 2% relative tolerance between 1% and 100% of the
/// capacity estimate.
SloSearch max_load_under_slo(const ExperimentConfig& cfg, std::uint64_t seed, SimTime slo, double percentile);

}  // namespace dpsim
