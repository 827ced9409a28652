#include "dpsim/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace dpsim {
namespace {

constexpr unsigned kExactLimitBits = 8;  // values < 256 are exact
constexpr std::uint64_t kExactLimit = 1ULL << kExactLimitBits;
constexpr unsigned kSubBucketBits = 7;
constexpr std::uint64_t kSubBuckets = 1ULL << kSubBucketBits;

}  // namespace

std::size_t LatencyHistogram::bucket_of(std::uint64_t ns) {
  if (ns < kExactLimit) return static_cast<std::size_t>(ns);
  const unsigned e = 63U - static_cast<unsigned>(std::countl_zero(ns));
  const std::uint64_t mantissa = ns >> (e - kSubBucketBits);  // in [128, 255]
  return static_cast<std::size_t>(kExactLimit + (e - kExactLimitBits) * kSubBuckets + (mantissa - kSubBuckets));
}

std::uint64_t LatencyHistogram::bucket_lower(std::size_t index) {
  if (index < kExactLimit) return index;
  const std::uint64_t rel = index - kExactLimit;
  const unsigned e = kExactLimitBits + static_cast<unsigned>(rel / kSubBuckets);
  const std::uint64_t mantissa = kSubBuckets + rel % kSubBuckets;
  return mantissa << (e - kSubBucketBits);
}

std::uint64_t LatencyHistogram::bucket_width(std::size_t index) {
  if (index < kExactLimit) return 1;
  const unsigned e = kExactLimitBits + static_cast<unsigned>((index - kExactLimit) / kSubBuckets);
  return 1ULL << (e - kSubBucketBits);
}

void LatencyHistogram::record(SimTime latency) {
  const std::uint64_t ns = latency.nanos();
  const std::size_t b = bucket_of(ns);
  if (b >= counts_.size()) counts_.resize(b + 1, 0);
  ++counts_[b];
  ++count_;
  sum_ += ns;
  min_ = std::min(min_, ns);
  max_ = std::max(max_, ns);
}

void LatencyHistogram::merge(const LatencyHistogram& other) {
  if (other.counts_.size() > counts_.size()) counts_.resize(other.counts_.size(), 0);
  for (std::size_t i = 0; i < other.counts_.size(); ++i) counts_[i] += other.counts_[i];
  count_ += other.count_;
  sum_ += other.sum_;
  min_ = std::min(min_, other.min_);
  max_ = std::max(max_, other.max_);
}

double LatencyHistogram::mean_ns() const {
  if (count_ == 0) return 0.0;
  return static_cast<double>(sum_) / static_cast<double>(count_);
}

SimTime LatencyHistogram::percentile(double p) const {
  if (!(p > 0.0 && p < 100.0)) throw std::invalid_argument("percentile must lie strictly between 0 and 100");
  if (count_ == 0) throw std::invalid_argument("percentile of an empty histogram");
  auto rank = static_cast<std::uint64_t>(std::ceil(p / 100.0 * static_cast<double>(count_)));
  rank = std::clamp<std::uint64_t>(rank, 1, count_);
  std::uint64_t seen = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    seen += counts_[i];
    if (seen >= rank) {
      const std::uint64_t centre = bucket_lower(i) + (bucket_width(i) - 1) / 2;
      return SimTime::from_nanos(std::clamp(centre, min_, max_));
    }
  }
  return SimTime::from_nanos(max_);
}

const AppSummary& SimSummary::app(std::string_view name) const {
  for (const auto& a : apps) {
    if (a.name == name) return a;
  }
  throw std::out_of_range("no application named '" + std::string(name) + "'");
}

bool detect_saturation(const AppSummary& app) {
  const auto& s = app.in_flight_samples;
  if (s.size() < 4) return false;
  const std::size_t half = s.size() / 2;
  const std::size_t last_quarter = s.size() - s.size() / 4;
  const double first = std::accumulate(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(half), 0.0) /
                       static_cast<double>(half);
  const double tail = std::accumulate(s.begin() + static_cast<std::ptrdiff_t>(last_quarter), s.end(), 0.0) /
                      static_cast<double>(s.size() - last_quarter);
  return tail > 2.0 * std::max(first, 1.0);
}

double capacity_from_utilization(const SimSummary& summary, std::size_t app_index) {
  const AppSummary& app = summary.apps.at(app_index);
  double peak = 0.0;
  for (double u : app.core_utilization) peak = std::max(peak, u);
  for (double u : summary.io_core_utilization) peak = std::max(peak, u);
  if (peak <= 0.0) return 0.0;
  const double rate = app.throughput_ops > 0.0 ? app.throughput_ops : app.offered_load_ops;
  return rate / peak;
}

CsvRow make_csv_row(std::string experiment, std::string policy, std::uint64_t seed, const AppSummary& app) {
  CsvRow row;
  row.experiment = std::move(experiment);
  row.policy = std::move(policy);
  row.seed = seed;
  row.offered_load_ops = app.offered_load_ops;
  row.throughput_ops = app.throughput_ops;
  if (!app.latency.empty()) {
    row.mean_ns = static_cast<std::uint64_t>(std::llround(app.latency.mean_ns()));
    row.p50_ns = app.latency.percentile(50).nanos();
    row.p99_ns = app.latency.percentile(99).nanos();
    row.p999_ns = app.latency.percentile(99.9).nanos();
  }
  row.activations = app.activations;
  row.preemptions = app.preemptions;
  row.violations = app.violations;
  row.util_mean = app.util_mean;
  return row;
}

std::string format_csv_row(const CsvRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%s,%llu,%.1f,%.1f,%llu,%llu,%llu,%llu,%llu,%llu,%llu,%.6f", r.experiment.c_str(),
                r.policy.c_str(), static_cast<unsigned long long>(r.seed), r.offered_load_ops, r.throughput_ops,
                static_cast<unsigned long long>(r.mean_ns), static_cast<unsigned long long>(r.p50_ns),
                static_cast<unsigned long long>(r.p99_ns), static_cast<unsigned long long>(r.p999_ns),
                static_cast<unsigned long long>(r.activations), static_cast<unsigned long long>(r.preemptions),
                static_cast<unsigned long long>(r.violations), r.util_mean);
  return buf;
}

void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) os << format_csv_row(r) << '\n';
}

}  // namespace dpsim
