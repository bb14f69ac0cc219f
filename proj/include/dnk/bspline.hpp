#pragma once
#include <array>
#include <vector>

namespace dnk {

// Clamped uniform cubic B-spline in the plane, evaluated by de Boor recursion.
// Passes through the first and last control points.
struct BSpline2 {
  std::vector<std::array<double, 2>> ctrl;
  std::vector<double> knots;  // length ctrl.size() + 4

  std::array<double, 2> eval(double u) const;  // u in [0,1]
};

BSpline2 make_spline(const std::vector<std::array<double, 2>>& control_points);

}  // namespace dnk
