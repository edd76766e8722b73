#pragma once

#include <charconv>
#include <cstdint>
#include <string>

namespace homdim {

// Shortest round-trip decimal; the basis of every bit-exact text output.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) { return std::to_string(v); }

}  // namespace homdim
