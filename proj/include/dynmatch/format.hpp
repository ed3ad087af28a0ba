#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace dynmatch {

// Shortest round-trip decimal form, so output is byte-stable across runs.
inline std::string format_number(double x) {
  if (x == 0.0) return "0";  // folds -0
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

// Fixed decimals for CSV cells.
inline std::string format_fixed(double x, int decimals = 6) {
  if (!std::isfinite(x)) return format_number(x);
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, decimals);
  std::string s(buf, r.ptr);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

}  // namespace dynmatch
