#pragma once
#include <vector>

#include "dnk/common.hpp"

namespace dnk {

// beta / alpha_bar / posterior sigma tables, 1-indexed by convention:
// entry [k-1] belongs to diffusion step k.
struct NoiseSchedule {
  int N = 0;
  std::vector<double> beta;
  std::vector<double> alpha_bar;
  std::vector<double> sigma;  // sqrt(beta_k)
};

// Linear beta ramp. The default ramp (see RunConfig) ends high enough that
// sqrt(alpha_bar_N) < 0.1, keeping the terminal marginal close to the prior
// at small N.
NoiseSchedule make_schedule(int N, double beta_start, double beta_end);

// out = sqrt(alpha_bar_k) tau0 + sqrt(1 - alpha_bar_k) eps, k in [1, N].
void forward_noise(const double* tau0, int dim, int k, const double* eps,
                   const NoiseSchedule& sched, double* out);

}  // namespace dnk
