#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gpebo/simulation.hpp"

namespace gpebo::cli {

struct GridAxis {
  std::string key;
  std::vector<double> values;
};

/// "alpha=1,10;f0=0.001,0.1". Keys: alpha, gamma, f0, noise_amplitude, seed,
/// dt, t_final. Throws std::invalid_argument on malformed input.
std::vector<GridAxis> parse_grid(std::string_view spec);

struct SweepPoint {
  std::vector<std::pair<std::string, double>> settings;
  SimulationOptions options;
};

/// Cartesian product, last axis varying fastest.
std::vector<SweepPoint> expand_grid(const std::vector<GridAxis>& axes);

struct SweepResult {
  SweepPoint point;
  std::optional<RunReport> report;
  std::string error;
};

/// Runs every point on up to `jobs` worker threads. Results keep grid order.
std::vector<SweepResult> run_sweep(const Scenario& sc, const std::vector<SweepPoint>& points,
                                   std::size_t jobs);

}  // namespace gpebo::cli
