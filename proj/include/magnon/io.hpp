#pragma once

#include <cstdio>
#include <ostream>
#include <string>

namespace magnon {

// 17 significant digits: enough to round-trip any double exactly.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// fixed-point with given decimals, used by the SVG renderer
inline std::string fmt_fixed(double x, int decimals) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

}  // namespace magnon
