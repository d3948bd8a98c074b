#pragma once

#include <cstddef>
#include <vector>

namespace sgpl {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

// N planar locations with one response and one regressor per location.
struct PointSet {
  std::vector<Point2> coords;
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const { return coords.size(); }
};

}  // namespace sgpl
