#ifndef CWFIELD_CSV_HPP
#define CWFIELD_CSV_HPP

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <string>

namespace cwfield {

/// Shortest round-trip-safe text for a double (17 significant digits).
inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_row(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  out += '\n';
  return out;
}

}  // namespace cwfield

#endif  // CWFIELD_CSV_HPP
