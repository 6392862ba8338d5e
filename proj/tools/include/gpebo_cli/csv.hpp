#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gpebo::cli {

class CsvError : public std::runtime_error {
 public:
  CsvError(std::size_t line, const std::string& message)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Numeric table with a mandatory header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws CsvError when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  std::vector<double> values(std::string_view name) const;
};

/// Throws CsvError with the offending line number; an empty body is
/// reported as "no data rows".
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace gpebo::cli
