#include "dnk/schedule.hpp"

#include <cmath>

namespace dnk {

NoiseSchedule make_schedule(int N, double beta_start, double beta_end) {
  require(N >= 1, "make_schedule: N >= 1");
  require(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0,
          "make_schedule: need 0 < beta_start <= beta_end < 1");
  NoiseSchedule s;
  s.N = N;
  s.beta.resize(N);
  s.alpha_bar.resize(N);
  s.sigma.resize(N);
  double prod = 1.0;
  for (int k = 0; k < N; ++k) {
    s.beta[k] = N == 1 ? beta_start : beta_start + (beta_end - beta_start) * double(k) / (N - 1);
    prod *= 1.0 - s.beta[k];
    s.alpha_bar[k] = prod;
    s.sigma[k] = std::sqrt(s.beta[k]);
  }
  return s;
}

void forward_noise(const double* tau0, int dim, int k, const double* eps,
                   const NoiseSchedule& sched, double* out) {
  require(k >= 1 && k <= sched.N, "forward_noise: step index out of range");
  double ab = sched.alpha_bar[k - 1];
  double c0 = std::sqrt(ab), c1 = std::sqrt(1.0 - ab);
  for (int i = 0; i < dim; ++i) out[i] = c0 * tau0[i] + c1 * eps[i];
}

}  // namespace dnk
