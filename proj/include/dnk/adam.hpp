#pragma once
#include <cmath>
#include <cstdint>
#include <vector>

#include "dnk/common.hpp"

namespace dnk {

// Bias-corrected adaptive-moment optimizer.
struct AdamState {
  double lr = 3e-4, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int64_t t = 0;
  std::vector<double> m, v;

  AdamState(size_t n, double lr_) : lr(lr_), m(n, 0.0), v(n, 0.0) {}

  void step(double* params, const double* grads, size_t n) {
    require(n == m.size(), "adam: size mismatch");
    ++t;
    double c1 = 1.0 - std::pow(beta1, double(t));
    double c2 = 1.0 - std::pow(beta2, double(t));
    bool ok = true;
    for (size_t i = 0; i < n; ++i) {
      double g = grads[i];
      ok &= std::isfinite(g);
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
      double mhat = m[i] / c1;
      double vhat = v[i] / c2;
      params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    require(ok, "adam: non-finite gradient");
  }
};

}  // namespace dnk
