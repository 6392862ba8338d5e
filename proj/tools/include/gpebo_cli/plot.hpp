#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gpebo_cli/csv.hpp"

namespace gpebo::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;
};

struct RenderedPlot {
  std::string svg;
  /// Samples dropped from a log-scale plot because they were ≤ 0.
  std::size_t omitted = 0;
};

/// Static line plot. On a log axis non-positive samples break the line and
/// are counted in a footnote.
RenderedPlot render_svg(const PlotSpec& spec);

/// param_error.svg, state_error.svg and delta.svg from a simulate CSV.
std::vector<std::filesystem::path> write_run_plots(const CsvTable& table,
                                                   const std::filesystem::path& out_dir);

}  // namespace gpebo::cli
