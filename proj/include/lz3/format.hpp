#pragma once

// Shortest round-trip formatting for doubles in CSV/JSON output.

#include <charconv>
#include <string>

namespace lz3::detail {

inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace lz3::detail
