#pragma once
#include <cmath>
#include <functional>
#include <vector>

#include "dnk/common.hpp"

namespace dnk {

// loss_fn(params, grad_out_or_null) -> loss. When grad_out is non-null it must
// be filled with d(loss)/d(params). Returns the max over coordinates of
// |analytic - central_difference| / (|central_difference| + 1e-12).
inline double grad_check(
    const std::function<double(const std::vector<double>&, std::vector<double>*)>& loss_fn,
    std::vector<double> params, double h) {
  std::vector<double> analytic(params.size(), 0.0);
  double f0 = loss_fn(params, &analytic);
  double f0b = loss_fn(params, nullptr);
  require(f0 == f0b, "grad_check: loss_fn not deterministic");
  double worst = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    double orig = params[i];
    params[i] = orig + h;
    double fp = loss_fn(params, nullptr);
    params[i] = orig - h;
    double fm = loss_fn(params, nullptr);
    params[i] = orig;
    double central = (fp - fm) / (2.0 * h);
    double err = std::fabs(analytic[i] - central) / (std::fabs(central) + 1e-12);
    if (err > worst) worst = err;
  }
  return worst;
}

}  // namespace dnk
