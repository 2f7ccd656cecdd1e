// format.hpp — tiny formatting helpers shared by serialization code.
#pragma once

#include <cstdio>
#include <string>

namespace spinbath {

// Decimal form of a double with 17 significant digits — enough to
// round-trip exactly, so equal values always print identically.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace spinbath
