#include <algorithm>
#include <cmath>

#include "dnk/adam.hpp"
#include "dnk/rng.hpp"
#include "dnk/student.hpp"

namespace dnk {

TrainResult train_student(StudentModel& m, const DistillDataset& ds, const LossWeights& lw,
                          int epochs, int batch_size, double lr, uint64_t seed) {
  const int M = static_cast<int>(ds.pairs.size());
  require(M > 0, "train_student: empty dataset");
  require(ds.H == m.H, "train_student: horizon mismatch");
  require(batch_size >= 1 && epochs >= 0, "train_student: bad schedule");

  Rng rng(seed);
  AdamState adam(m.theta.size(), lr);
  std::vector<int> order(M);
  for (int i = 0; i < M; ++i) order[i] = i;
  std::vector<double> grads(m.theta.size(), 0.0);
  std::vector<double> last_good = m.theta;  // restored on divergence

  TrainResult res;
  res.curve.reserve(epochs);
  std::vector<int> idx;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    LossBreakdown mean;
    for (int b0 = 0; b0 < M; b0 += batch_size) {
      const int nb = std::min(batch_size, M - b0);
      idx.assign(order.begin() + b0, order.begin() + b0 + nb);
      StudentBatch batch = make_batch(ds, idx);
      LossBreakdown l;
      bool bad = false;
      try {
        l = student_loss(m, batch, lw, grads.data());
        if (!std::isfinite(l.total)) bad = true;
      } catch (const DnkError&) {
        bad = true;  // non-finite activations surface as forward-pass errors
      }
      if (!bad) {
        try {
          adam.step(m.theta.data(), grads.data(), grads.size());
        } catch (const DnkError&) {
          bad = true;  // non-finite gradient
        }
      }
      if (bad) {
        m.theta = last_good;
        res.diverged = true;
        return res;
      }
      const double f = static_cast<double>(nb) / M;
      mean.rec += f * l.rec;
      mean.lat += f * l.lat;
      mean.pred += f * l.pred;
      mean.act += f * l.act;
      mean.spec += f * l.spec;
      mean.inv += f * l.inv;
      mean.total += f * l.total;
    }
    res.curve.push_back(mean);
    res.epochs_done = epoch + 1;
    last_good = m.theta;
  }
  return res;
}

}  // namespace dnk
