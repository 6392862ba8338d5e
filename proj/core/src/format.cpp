#include "gpebo/format.hpp"

#include <charconv>
#include <cmath>

namespace gpebo {

std::string format_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  if (v == 0.0) {
    v = 0.0;  // drop the sign of negative zero
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_array(std::span<const double> v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) {
      out += ", ";
    }
    out += format_double(v[i]);
  }
  out += "]";
  return out;
}

}  // namespace gpebo
