#pragma once

#include <charconv>
#include <string>

namespace occ {

/// Shortest round-trip decimal form; identical bytes for identical doubles.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace occ
