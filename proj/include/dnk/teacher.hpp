#pragma once
#include <vector>

#include "dnk/encoding.hpp"
#include "dnk/matrix.hpp"
#include "dnk/mlp.hpp"
#include "dnk/schedule.hpp"

namespace dnk {

// Noise-prediction net over [noisy trajectory, timestep embedding, context].
struct Teacher {
  int H = 16;
  MlpSpec spec;
  std::vector<double> theta;

  int flat_dim() const { return H * kStepDim; }
};

// Final layer zero-initialized so the initial prediction is exactly zero noise.
Teacher make_teacher(int H, int hidden, uint64_t seed);

// Trajectory-shaped noise with the current-state block held fixed. Unfixed
// entries are lambda-scaled standard normals drawn in entry order.
struct ConditionedPrior {
  std::vector<double> values;       // H * kStepDim, model space
  std::vector<uint8_t> fixed_mask;  // 1 exactly on the first state block
  std::vector<double> ctx;          // kCtxDim, model space
  double lambda = 0.5;
};

ConditionedPrior make_conditioned_prior(const std::vector<double>& ctx, double lambda, int H,
                                        uint64_t seed);

struct DemoSet {
  int H = 0;
  std::vector<std::vector<double>> traj;  // model-space flattened trajectories
  std::vector<std::vector<double>> ctx;
};

// Standard noise-prediction objective, uniform step draw; the fixed first
// state block is excluded from both noising and the loss. Returns the
// per-epoch loss curve.
std::vector<double> train_teacher(Teacher& teacher, const DemoSet& demos,
                                  const NoiseSchedule& sched, int epochs, int batch_size,
                                  double lr, uint64_t seed);

// Batched reverse denoising with per-chain generators: chain i is a pure
// function of (teacher, priors[i], chain_seeds[i]) regardless of batch
// composition, chunking, or thread count. sigma_override >= 0 replaces the
// schedule's posterior sigma (used by the closed-form recursion oracle).
Matrix reverse_sample_batch(const Teacher& teacher, const std::vector<ConditionedPrior>& priors,
                            const NoiseSchedule& sched, const std::vector<uint64_t>& chain_seeds,
                            int threads, double sigma_override = -1.0);

std::vector<double> reverse_sample(const Teacher& teacher, const ConditionedPrior& prior,
                                   const NoiseSchedule& sched, uint64_t seed,
                                   double sigma_override = -1.0);

}  // namespace dnk
