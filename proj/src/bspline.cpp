#include "dnk/bspline.hpp"

#include "dnk/common.hpp"

namespace dnk {

BSpline2 make_spline(const std::vector<std::array<double, 2>>& control_points) {
  require(control_points.size() >= 4, "make_spline: need >= 4 control points");
  BSpline2 s;
  s.ctrl = control_points;
  int c = int(control_points.size());
  int p = 3;
  s.knots.resize(c + p + 1);
  int interior = c - p;  // number of nonzero spans
  for (int i = 0; i <= p; ++i) s.knots[i] = 0.0;
  for (int i = 1; i < interior; ++i) s.knots[p + i] = double(i) / interior;
  for (int i = 0; i <= p; ++i) s.knots[c + i] = 1.0;
  return s;
}

std::array<double, 2> BSpline2::eval(double u) const {
  const int p = 3;
  int c = int(ctrl.size());
  if (u <= 0.0) return ctrl.front();
  if (u >= 1.0) return ctrl.back();
  // span k: knots[k] <= u < knots[k+1], p <= k <= c-1
  int k = p;
  while (k < c - 1 && u >= knots[k + 1]) ++k;

  std::array<double, 2> d[4];
  for (int i = 0; i <= p; ++i) d[i] = ctrl[i + k - p];
  for (int r = 1; r <= p; ++r) {
    for (int j = p; j >= r; --j) {
      double lo = knots[j + k - p];
      double hi = knots[j + 1 + k - r];
      double alpha = (u - lo) / (hi - lo);
      d[j][0] = (1.0 - alpha) * d[j - 1][0] + alpha * d[j][0];
      d[j][1] = (1.0 - alpha) * d[j - 1][1] + alpha * d[j][1];
    }
  }
  return d[p];
}

}  // namespace dnk
