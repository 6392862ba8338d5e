#pragma once

#include <span>
#include <string>

namespace gpebo {

/// Shortest decimal string that round-trips to the same double; '.' decimal
/// separator regardless of locale.
std::string format_double(double v);

/// "[a, b, c]" with format_double entries.
std::string format_array(std::span<const double> v);

}  // namespace gpebo
