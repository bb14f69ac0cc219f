#include "dnk/teacher.hpp"

#include <algorithm>
#include <cmath>

#include "dnk/adam.hpp"
#include "dnk/parallel.hpp"
#include "dnk/rng.hpp"

namespace dnk {

Teacher make_teacher(int H, int hidden, uint64_t seed) {
  require(H >= 1 && hidden >= 1, "make_teacher: bad sizes");
  Teacher t;
  t.H = H;
  const int flat = H * kStepDim;
  t.spec.dims = {flat + kTimeEmbedDim + kCtxDim, hidden, hidden, flat};
  t.spec.hidden = Act::SmoothRelu;
  t.theta.assign(t.spec.param_count(), 0.0);
  Rng rng(seed);
  init_mlp(t.spec, t.theta.data(), rng);
  zero_final_layer(t.spec, t.theta.data());
  return t;
}

ConditionedPrior make_conditioned_prior(const std::vector<double>& ctx, double lambda, int H,
                                        uint64_t seed) {
  require(static_cast<int>(ctx.size()) == kCtxDim, "conditioned prior: bad context size");
  require(lambda > 0.0, "conditioned prior: lambda must be positive");
  ConditionedPrior p;
  p.ctx = ctx;
  p.lambda = lambda;
  const int flat = H * kStepDim;
  p.values.assign(flat, 0.0);
  p.fixed_mask.assign(flat, 0);
  for (int d = 0; d < kStateDim; ++d) {
    p.values[d] = ctx[d];  // context leads with the current state, model space
    p.fixed_mask[d] = 1;
  }
  Rng rng(seed);
  for (int d = kStateDim; d < flat; ++d) p.values[d] = lambda * rng.normal();
  return p;
}

std::vector<double> train_teacher(Teacher& teacher, const DemoSet& demos,
                                  const NoiseSchedule& sched, int epochs, int batch_size,
                                  double lr, uint64_t seed) {
  const int M = static_cast<int>(demos.traj.size());
  require(M > 0 && demos.ctx.size() == demos.traj.size(), "train_teacher: empty demo set");
  require(demos.H == teacher.H, "train_teacher: horizon mismatch");
  require(batch_size >= 1 && epochs >= 0, "train_teacher: bad schedule");
  const int flat = teacher.flat_dim();
  const int in_dim = teacher.spec.in_dim();

  Rng rng(seed);
  AdamState adam(teacher.theta.size(), lr);
  std::vector<int> order(M);
  for (int i = 0; i < M; ++i) order[i] = i;

  std::vector<double> curve;
  curve.reserve(epochs);
  std::vector<double> grads(teacher.theta.size(), 0.0);
  std::vector<double> eps(flat), noisy(flat), temb(kTimeEmbedDim);
  MlpCache cache;
  Matrix pred;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (int b0 = 0; b0 < M; b0 += batch_size) {
      const int nb = std::min(batch_size, M - b0);
      Matrix X(nb, in_dim);
      Matrix target(nb, flat);  // true noise on free entries, zero on fixed
      for (int i = 0; i < nb; ++i) {
        const auto& tau0 = demos.traj[order[b0 + i]];
        const auto& ctx = demos.ctx[order[b0 + i]];
        require(static_cast<int>(tau0.size()) == flat &&
                    static_cast<int>(ctx.size()) == kCtxDim,
                "train_teacher: demo shape mismatch");
        const int k = 1 + rng.uniform_int(sched.N);
        for (int d = 0; d < flat; ++d) eps[d] = rng.normal();
        forward_noise(tau0.data(), flat, k, eps.data(), sched, noisy.data());
        for (int d = 0; d < kStateDim; ++d) {
          noisy[d] = tau0[d];  // conditioned block is never noised
          eps[d] = 0.0;
        }
        double* xr = X.row(i);
        std::copy(noisy.begin(), noisy.end(), xr);
        time_embed(static_cast<double>(k) / sched.N, xr + flat);
        std::copy(ctx.begin(), ctx.end(), xr + flat + kTimeEmbedDim);
        std::copy(eps.begin(), eps.end(), target.row(i));
      }

      mlp_forward_batch(teacher.spec, teacher.theta.data(), X, pred, &cache);
      Matrix dY(nb, flat);
      double loss = 0.0;
      for (int i = 0; i < nb; ++i) {
        for (int d = 0; d < flat; ++d) {
          double r = (d < kStateDim) ? 0.0 : pred.at(i, d) - target.at(i, d);
          loss += r * r;
          dY.at(i, d) = 2.0 / nb * r;
        }
      }
      loss /= nb;
      if (!std::isfinite(loss))
        throw DnkError("train_teacher: non-finite loss at epoch " + std::to_string(epoch));
      epoch_loss += loss * nb;

      std::fill(grads.begin(), grads.end(), 0.0);
      mlp_backward_batch(teacher.spec, teacher.theta.data(), cache, dY, grads.data(), nullptr);
      adam.step(teacher.theta.data(), grads.data(), grads.size());
    }
    curve.push_back(epoch_loss / M);
  }
  return curve;
}

Matrix reverse_sample_batch(const Teacher& teacher, const std::vector<ConditionedPrior>& priors,
                            const NoiseSchedule& sched, const std::vector<uint64_t>& chain_seeds,
                            int threads, double sigma_override) {
  const int B = static_cast<int>(priors.size());
  require(B > 0 && chain_seeds.size() == priors.size(), "reverse_sample_batch: bad batch");
  const int flat = teacher.flat_dim();
  const int in_dim = teacher.spec.in_dim();
  Matrix out(B, flat);

  // Fixed chunk width: the work split never depends on the thread count, and
  // row-stable matmuls make every chunk size produce identical chains anyway.
  constexpr int kChunk = 16;
  const int n_chunks = (B + kChunk - 1) / kChunk;

  parallel_for(n_chunks, threads, [&](int c) {
    const int c0 = c * kChunk;
    const int nb = std::min(kChunk, B - c0);
    Matrix tau(nb, flat);
    std::vector<Rng> chain_rngs;
    chain_rngs.reserve(nb);
    for (int i = 0; i < nb; ++i) {
      const auto& p = priors[c0 + i];
      require(static_cast<int>(p.values.size()) == flat && p.fixed_mask.size() == p.values.size(),
              "reverse_sample_batch: prior shape mismatch");
      std::copy(p.values.begin(), p.values.end(), tau.row(i));
      chain_rngs.emplace_back(chain_seeds[c0 + i]);
    }

    Matrix X(nb, in_dim);
    Matrix eps_hat;
    MlpCache cache;
    std::vector<double> temb(kTimeEmbedDim);
    for (int k = sched.N; k >= 1; --k) {
      time_embed(static_cast<double>(k) / sched.N, temb.data());
      for (int i = 0; i < nb; ++i) {
        double* xr = X.row(i);
        std::copy(tau.row(i), tau.row(i) + flat, xr);
        std::copy(temb.begin(), temb.end(), xr + flat);
        const auto& ctx = priors[c0 + i].ctx;
        std::copy(ctx.begin(), ctx.end(), xr + flat + kTimeEmbedDim);
      }
      mlp_forward_batch(teacher.spec, teacher.theta.data(), X, eps_hat, &cache);

      const double beta = sched.beta[k - 1];
      const double ab = sched.alpha_bar[k - 1];
      const double c_mu = 1.0 / std::sqrt(1.0 - beta);
      const double c_eps = beta / std::sqrt(1.0 - ab);
      const double sigma = sigma_override >= 0.0 ? sigma_override : sched.sigma[k - 1];
      for (int i = 0; i < nb; ++i) {
        double* tr = tau.row(i);
        const double* er = eps_hat.row(i);
        const auto& p = priors[c0 + i];
        for (int d = 0; d < flat; ++d) {
          double mu = c_mu * (tr[d] - c_eps * er[d]);
          tr[d] = (k > 1) ? mu + sigma * chain_rngs[i].normal() : mu;
        }
        // Re-impose the conditioned block after every transition.
        for (int d = 0; d < flat; ++d)
          if (p.fixed_mask[d]) tr[d] = p.values[d];
      }
    }
    for (int i = 0; i < nb; ++i) {
      const double* tr = tau.row(i);
      for (int d = 0; d < flat; ++d) {
        require(std::isfinite(tr[d]), "reverse_sample_batch: non-finite sample");
        out.at(c0 + i, d) = tr[d];
      }
    }
  });
  return out;
}

std::vector<double> reverse_sample(const Teacher& teacher, const ConditionedPrior& prior,
                                   const NoiseSchedule& sched, uint64_t seed,
                                   double sigma_override) {
  Matrix one = reverse_sample_batch(teacher, {prior}, sched, {seed}, 1, sigma_override);
  return std::vector<double>(one.row(0), one.row(0) + teacher.flat_dim());
}

}  // namespace dnk
