#pragma once

#include <cmath>

namespace ciisim {

/// Planar position in kilometres.
struct Position {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Position&) const = default;
};

inline double distance_km(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline double distance_m(const Position& a, const Position& b) {
  return 1000.0 * distance_km(a, b);
}

}  // namespace ciisim
