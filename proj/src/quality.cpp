#include "dnk/quality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dnk/adam.hpp"
#include "dnk/rng.hpp"

namespace dnk {

// Average ranks (0-based) with exact-value ties sharing the mean rank.
static std::vector<double> average_ranks(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> rank(n, 0.0);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * (i + j);
    for (int t = i; t <= j; ++t) rank[order[t]] = r;
    i = j + 1;
  }
  return rank;
}

std::vector<double> quantile_weights(const std::vector<double>& scores, double beta) {
  const int n = static_cast<int>(scores.size());
  require(n > 0, "quantile_weights: empty scores");
  require(beta >= 0.0, "quantile_weights: negative beta");
  if (n == 1) return {1.0 + beta};
  std::vector<double> w = average_ranks(scores);
  for (double& x : w) x = 1.0 + beta * (x / (n - 1));
  return w;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size() && !a.empty(), "spearman: size mismatch");
  const int n = static_cast<int>(a.size());
  std::vector<double> ra = average_ranks(a), rb = average_ranks(b);
  double ma = 0.0, mb = 0.0;
  for (int i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (int i = 0; i < n; ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

Scorer make_scorer(int H, int hidden, uint64_t seed) {
  require(H >= 1 && hidden >= 1, "make_scorer: bad sizes");
  Scorer s;
  s.H = H;
  s.spec.dims = {H * kStepDim + kCtxDim, hidden, hidden, 1};
  s.spec.hidden = Act::Tanh;
  s.theta.assign(s.spec.param_count(), 0.0);
  Rng rng(seed);
  init_mlp(s.spec, s.theta.data(), rng);
  return s;
}

static Matrix pack_inputs(const Scorer& scorer, const std::vector<std::vector<double>>& traj,
                          const std::vector<std::vector<double>>& ctx, int lo, int hi) {
  const int flat = scorer.H * kStepDim;
  Matrix X(hi - lo, flat + kCtxDim);
  for (int i = lo; i < hi; ++i) {
    require(static_cast<int>(traj[i].size()) == flat &&
                static_cast<int>(ctx[i].size()) == kCtxDim,
            "scorer: input shape mismatch");
    double* xr = X.row(i - lo);
    std::copy(traj[i].begin(), traj[i].end(), xr);
    std::copy(ctx[i].begin(), ctx[i].end(), xr + flat);
  }
  return X;
}

ScorerReport train_scorer(Scorer& scorer, const ScorerData& data, int epochs, int batch_size,
                          double lr, double holdout_frac, uint64_t seed) {
  const int M = static_cast<int>(data.traj.size());
  require(M >= 2 && data.ctx.size() == data.traj.size() && data.score.size() == data.traj.size(),
          "train_scorer: bad dataset");
  require(holdout_frac > 0.0 && holdout_frac < 1.0, "train_scorer: bad holdout fraction");
  require(batch_size >= 1 && epochs >= 0, "train_scorer: bad schedule");
  const int n_hold = std::max(1, static_cast<int>(std::ceil(holdout_frac * M)));
  const int n_train = M - n_hold;
  require(n_train >= 1, "train_scorer: nothing left to train on");

  ScorerReport rep;
  const double smin = *std::min_element(data.score.begin(), data.score.end());
  const double smax = *std::max_element(data.score.begin(), data.score.end());
  // A constant target still trains (the net regresses to the constant) but
  // carries no ranking signal, so the report flags it as degenerate.
  rep.degenerate = (smin == smax);

  Rng rng(seed);
  AdamState adam(scorer.theta.size(), lr);
  std::vector<int> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grads(scorer.theta.size(), 0.0);
  const int flat = scorer.H * kStepDim;
  MlpCache cache;
  Matrix pred;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (int b0 = 0; b0 < n_train; b0 += batch_size) {
      const int nb = std::min(batch_size, n_train - b0);
      Matrix X(nb, flat + kCtxDim);
      std::vector<double> y(nb);
      for (int i = 0; i < nb; ++i) {
        const int j = order[b0 + i];
        double* xr = X.row(i);
        std::copy(data.traj[j].begin(), data.traj[j].end(), xr);
        std::copy(data.ctx[j].begin(), data.ctx[j].end(), xr + flat);
        y[i] = data.score[j];
      }
      mlp_forward_batch(scorer.spec, scorer.theta.data(), X, pred, &cache);
      Matrix dY(nb, 1);
      double loss = 0.0;
      for (int i = 0; i < nb; ++i) {
        const double r = pred.at(i, 0) - y[i];
        loss += r * r;
        dY.at(i, 0) = 2.0 / nb * r;
      }
      loss /= nb;
      if (!std::isfinite(loss))
        throw DnkError("train_scorer: non-finite loss at epoch " + std::to_string(epoch));
      epoch_loss += loss * nb;
      std::fill(grads.begin(), grads.end(), 0.0);
      mlp_backward_batch(scorer.spec, scorer.theta.data(), cache, dY, grads.data(), nullptr);
      adam.step(scorer.theta.data(), grads.data(), grads.size());
    }
    rep.curve.push_back(epoch_loss / n_train);
  }

  Matrix Xh = pack_inputs(scorer, data.traj, data.ctx, n_train, M);
  Matrix ph;
  mlp_forward_batch(scorer.spec, scorer.theta.data(), Xh, ph, nullptr);
  std::vector<double> predh(n_hold), truth(n_hold);
  for (int i = 0; i < n_hold; ++i) {
    predh[i] = ph.at(i, 0);
    truth[i] = data.score[n_train + i];
  }
  rep.holdout_spearman = spearman(predh, truth);
  return rep;
}

double scorer_predict(const Scorer& scorer, const std::vector<double>& traj,
                      const std::vector<double>& ctx) {
  return scorer_predict_batch(scorer, {traj}, {ctx})[0];
}

std::vector<double> scorer_predict_batch(const Scorer& scorer,
                                         const std::vector<std::vector<double>>& traj,
                                         const std::vector<std::vector<double>>& ctx) {
  require(traj.size() == ctx.size() && !traj.empty(), "scorer_predict: bad batch");
  Matrix X = pack_inputs(scorer, traj, ctx, 0, static_cast<int>(traj.size()));
  Matrix p;
  mlp_forward_batch(scorer.spec, scorer.theta.data(), X, p, nullptr);
  std::vector<double> out(traj.size());
  for (size_t i = 0; i < traj.size(); ++i) out[i] = p.at(static_cast<int>(i), 0);
  return out;
}

}  // namespace dnk
