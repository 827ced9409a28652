#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dpsim/engine.hpp"
#include "dpsim/experiment_config.hpp"
#include "dpsim/metrics.hpp"

namespace dpsim {

struct CompletionRecord {
  AppId app = 0;
  RequestId request = 0;
  SimTime arrival;
  SimTime completed;
  CoreId core = 0;
  SimTime latency;
};

struct SimOptions {
  /// Called once per finished request, in completion order.
  std::function<void(const CompletionRecord&)> on_complete;
  /// Replaces the Poisson arrivals of app i with the given sorted times
  /// when entry i is set. Service times and steering are still sampled.
  std::vector<std::optional<std::vector<SimTime>>> arrival_trace;
};

/// Raised when a run ends with an accounting identity broken.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Runs one seeded simulation of the configured system at the configured
/// loads. The config must already be valid.
SimSummary simulate(const ExperimentConfig& config, std::uint64_t seed, const SimOptions& options = {});

}  // namespace dpsim
