#pragma once

#include <charconv>
#include <string>

namespace mlpalg {

// Shortest decimal text that parses back to the same double.
inline std::string format_shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace mlpalg
