#pragma once
#include <functional>
#include <string>
#include <vector>

#include "dnk/quality.hpp"
#include "dnk/teacher.hpp"

namespace dnk {

// One offline distillation example: the conditioned prior the student will
// see, the teacher's denoised sample for that prior, its predicted quality
// score, and the quantile weight derived from the score.
struct DistillPair {
  ConditionedPrior prior;
  std::vector<double> target;  // flat model space, same length as prior.values
  double score = 0.0;
  double weight = 1.0;
};

struct DistillDataset {
  int H = 16;
  int m = kStateDim;
  int n = kActionDim;
  int ctx_dim = kCtxDim;
  int N = 0;              // diffusion steps used to draw the targets
  double beta = 1.0;      // reweight strength the weights were built with
  uint64_t config_hash = 0;  // provenance, persisted in the header
  uint64_t seed = 0;
  std::vector<DistillPair> pairs;
  // In-memory diagnostic only (not persisted): the temperature drawn per
  // record, for mixture-frequency checks.
  std::vector<double> lambdas;
};

using TaskSampler = std::function<SampledTask(uint64_t seed)>;

// Draws M (scene, temperature) records, reverse-samples the teacher once per
// record, scores each sample, and assigns quantile weights across the whole
// dataset. Record i is a pure function of derive_seed(seed, i); a sampler
// failure is retried up to 10 times with fresh sub-seeds before aborting.
// All stored values are rounded to 32-bit floats so the in-memory dataset is
// exactly what a save/load round trip yields.
DistillDataset generate_pairs(const Teacher& teacher, const Scorer& scorer,
                              const NoiseSchedule& sched, const TaskSampler& sampler, int M,
                              const std::vector<double>& temps, const std::vector<double>& probs,
                              double beta, uint64_t seed, int threads);

// Binary container: 8-byte magic "DNKDSET1", one text header line of
// key=value pairs, then per record little-endian f32 fields in order
// (prior values, mask bytes, context, target, score, weight).
void save_dataset(const DistillDataset& ds, const std::string& path);
DistillDataset load_dataset(const std::string& path);

}  // namespace dnk
