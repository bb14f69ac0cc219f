#pragma once
#include <vector>

#include "dnk/distill.hpp"
#include "dnk/matrix.hpp"
#include "dnk/mlp.hpp"

namespace dnk {

enum class Variant { Fdk, Kdm };

// One-step distilled sampler: encoder -> latent transition -> decoder.
// The FDK transition applies sample-dependent modal gains between a fixed
// down-mixing Q and up-mixing P; the KDM baseline applies one global linear
// map A. Parameters live in a single flat vector:
//   FDK: [encoder | gain net | P^T | Q^T | decoder]
//   KDM: [encoder | A^T | decoder]
// P, Q, A are stored transposed so a batched transition is a plain row-major
// product (row i of Z @ M^T equals M @ z_i).
struct StudentModel {
  int H = 16;
  int latent = 64;
  Variant variant = Variant::Fdk;
  MlpSpec enc_spec;    // flat+ctx -> 4L -> 4L -> L, tanh
  MlpSpec gamma_spec;  // L -> 2L -> L, tanh (FDK only)
  MlpSpec dec_spec;    // L -> 4L -> 4L -> flat, tanh
  std::vector<double> theta;

  int flat_dim() const { return H * kStepDim; }
  int in_dim() const { return flat_dim() + kCtxDim; }
  size_t enc_off() const { return 0; }
  size_t gamma_off() const;
  size_t pt_off() const;
  size_t qt_off() const;
  size_t at_off() const;
  size_t dec_off() const;
  size_t param_count() const;
};

// Encoder/decoder get fan-in-scaled normal weights; the gain net's output
// layer is zeroed with bias 1 (gains start at exactly 1), and P is identity
// plus 1e-3 off-diagonal noise with Q = P^{-1}, so the initial transition is
// the identity map and the inverse-consistency penalty starts at ~0. KDM's A
// is identity plus the same off-diagonal noise.
StudentModel make_student(int H, int latent, Variant variant, uint64_t seed);

// Counts network evaluations per input row, so a batched call over B rows
// registers B of each stage. Used to verify the one-pass inference contract.
struct EvalCounts {
  long enc = 0, trans = 0, dec = 0;
};

// Single-vector paths (tests and composition).
std::vector<double> student_encode(const StudentModel& m, const std::vector<double>& x,
                                   EvalCounts* counts = nullptr);
std::vector<double> gamma_eval(const StudentModel& m, const std::vector<double>& z);
std::vector<double> fdk_apply(const StudentModel& m, const std::vector<double>& z,
                              EvalCounts* counts = nullptr);
std::vector<double> kdm_apply(const StudentModel& m, const std::vector<double>& z,
                              EvalCounts* counts = nullptr);
std::vector<double> student_decode(const StudentModel& m, const std::vector<double>& z,
                                   EvalCounts* counts = nullptr);

// One-step inference. X rows are [prior values, context]; exactly one encoder
// pass, one transition, one decoder pass per row.
void student_forward_batch(const StudentModel& m, const Matrix& X, Matrix& out,
                           EvalCounts* counts = nullptr);
std::vector<double> student_forward(const StudentModel& m, const ConditionedPrior& prior,
                                    EvalCounts* counts = nullptr);

// Accessors that hide the transposed storage (arguments in math orientation).
void set_fdk_P(StudentModel& m, const Matrix& P);
void set_fdk_Q(StudentModel& m, const Matrix& Q);
void set_kdm_A(StudentModel& m, const Matrix& A);
Matrix get_fdk_P(const StudentModel& m);
Matrix get_fdk_Q(const StudentModel& m);
Matrix get_kdm_A(const StudentModel& m);

// ---- training objective ----

struct LossWeights {
  double a_pred = 1.0, a_rec = 0.8, a_lat = 0.2, a_act = 1.0, a_spec = 0.01, a_inv = 1.0;
  double act_w1 = 1.5, act_wtail = 0.6;  // action-sequence step weights
};

struct LossBreakdown {
  double rec = 0, lat = 0, pred = 0, act = 0, spec = 0, inv = 0, total = 0;
};

struct StudentBatch {
  Matrix X;               // B x (flat+ctx): [prior, ctx]
  Matrix Xt;              // B x (flat+ctx): [target, ctx]
  Matrix T;               // B x flat: target
  std::vector<double> w;  // per-sample quality weights
};

StudentBatch make_batch(const DistillDataset& ds, const std::vector<int>& idx);

// Full objective with analytic gradients for every parameter. Data terms
// (rec/lat/pred/act) are quality-weighted means over the batch; the gain
// hinge and inverse-consistency terms are structural and unweighted. The
// latent-consistency target is the encoded teacher sample with gradients
// blocked; lat_override substitutes a constant target matrix (stop-gradient
// verification hook). grads, when given, is zeroed and filled.
LossBreakdown student_loss(const StudentModel& m, const StudentBatch& b, const LossWeights& lw,
                           double* grads, const Matrix* lat_override = nullptr);

struct TrainResult {
  std::vector<LossBreakdown> curve;  // per-epoch means
  bool diverged = false;             // non-finite loss hit; model restored to last good epoch
  int epochs_done = 0;
};

TrainResult train_student(StudentModel& m, const DistillDataset& ds, const LossWeights& lw,
                          int epochs, int batch_size, double lr, uint64_t seed);

}  // namespace dnk
