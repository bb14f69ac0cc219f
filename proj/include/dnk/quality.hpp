#pragma once
#include <vector>

#include "dnk/encoding.hpp"
#include "dnk/matrix.hpp"
#include "dnk/mlp.hpp"

namespace dnk {

// Quantile-based sample weights in [1, 1+beta]. Rank 0 is the worst score;
// tied scores share the average of the ranks they span. A single sample gets
// the top weight.
std::vector<double> quantile_weights(const std::vector<double>& scores, double beta);

// Rank correlation with average-rank ties; 0 if either side is constant.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Small regression net mapping [trajectory, context] to a scalar geometry
// score; used to sanity-check that scored quality is learnable.
struct Scorer {
  int H = 16;
  MlpSpec spec;
  std::vector<double> theta;
};

Scorer make_scorer(int H, int hidden, uint64_t seed);

struct ScorerData {
  std::vector<std::vector<double>> traj;  // model space
  std::vector<std::vector<double>> ctx;
  std::vector<double> score;
};

struct ScorerReport {
  std::vector<double> curve;      // per-epoch train MSE
  double holdout_spearman = 0.0;  // rank agreement on the held-out tail
  bool degenerate = false;        // all targets equal: no ranking signal
};

// Trains on the leading (1 - holdout_frac) fraction, evaluates rank agreement
// on the rest. Call with pre-shuffled data.
ScorerReport train_scorer(Scorer& scorer, const ScorerData& data, int epochs, int batch_size,
                          double lr, double holdout_frac, uint64_t seed);

double scorer_predict(const Scorer& scorer, const std::vector<double>& traj,
                      const std::vector<double>& ctx);
std::vector<double> scorer_predict_batch(const Scorer& scorer,
                                         const std::vector<std::vector<double>>& traj,
                                         const std::vector<std::vector<double>>& ctx);

}  // namespace dnk
