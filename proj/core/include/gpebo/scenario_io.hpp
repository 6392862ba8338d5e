#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "gpebo/scenario.hpp"

namespace gpebo {

/// Malformed scenario text. `line()` is 1-based (0 when not tied to a line).
class ScenarioParseError : public ScenarioError {
 public:
  ScenarioParseError(std::string field, std::size_t line, const std::string& message)
      : ScenarioError(std::move(field),
                      (line ? "line " + std::to_string(line) + ": " : std::string()) + message),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Flat `key = value` text. Values are numbers, bracketed arrays (nested for
/// matrices), `{k=v, ...}` records, or a bare word for `name`. `#` starts a
/// comment. Parsing does not validate; call validate() afterwards.
Scenario parse_scenario(std::string_view text);

/// Writes every field; load(write(sc)) == sc exactly.
std::string format_scenario(const Scenario& sc);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& sc, const std::filesystem::path& path);

}  // namespace gpebo
