#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "gpebo/simulation.hpp"

namespace gpebo::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,       // failed checks or I/O trouble
  kInvalidInput = 2,  // scenario, CSV or argument errors
  kBlowUp = 3,
};

int cmd_example(const std::filesystem::path& out_path, bool slow_gains, std::ostream& out,
                std::ostream& err);

struct SimulateArgs {
  std::filesystem::path scenario;
  SimulationOptions options;
  /// Default: the scenario path with a .csv extension.
  std::optional<std::filesystem::path> csv;
  std::optional<std::filesystem::path> report;
};
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);

/// Default report path: the scenario path with a .verify.txt extension.
int cmd_verify(const std::filesystem::path& scenario,
               const std::optional<std::filesystem::path>& report, std::ostream& out,
               std::ostream& err);

int cmd_plot(const std::filesystem::path& csv, const std::filesystem::path& out_dir,
             std::ostream& out, std::ostream& err);

int cmd_sweep(const std::filesystem::path& scenario, const std::string& grid, std::size_t jobs,
              const std::optional<std::filesystem::path>& out_path, std::ostream& out,
              std::ostream& err);

/// Parses argv and dispatches to the commands above.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gpebo::cli
