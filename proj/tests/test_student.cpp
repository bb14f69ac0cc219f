#include <cmath>
#include <vector>

#include "doctest.h"
#include "dnk/gradcheck.hpp"
#include "dnk/rng.hpp"
#include "dnk/student.hpp"

using namespace dnk;

namespace {

// Small-but-complete model for math checks: 27-dim input, 4-dim latent.
StudentModel tiny_model(Variant v, uint64_t seed) {
  StudentModel m = make_student(2, 4, v, seed);
  Rng rng(derive_seed(seed, 5));
  for (double& w : m.theta) w += 0.05 * rng.normal();
  if (v == Variant::Fdk) {
    // Keep the gains well away from the hinge kink at |gamma| = 1 so finite
    // differences stay valid: small output weights, strong per-unit biases.
    double* g = m.theta.data() + m.gamma_off();
    const MlpSpec& gs = m.gamma_spec;
    const int last = gs.layers() - 1;
    double* W = g + gs.weight_offset(last);
    for (size_t i = 0; i < size_t(gs.dims[last]) * gs.dims[last + 1]; ++i)
      W[i] = 0.01 * rng.normal();
    double* b = g + gs.bias_offset(last);
    const double safe[4] = {1.3, 0.7, -1.4, 0.2};
    for (int j = 0; j < gs.dims[last + 1]; ++j) b[j] = safe[j % 4];
  }
  return m;
}

StudentBatch random_batch(const StudentModel& m, int B, uint64_t seed) {
  Rng rng(seed);
  StudentBatch b;
  b.X = Matrix(B, m.in_dim());
  b.Xt = Matrix(B, m.in_dim());
  b.T = Matrix(B, m.flat_dim());
  b.w.resize(B);
  for (double& x : b.X.a) x = 0.5 * rng.normal();
  for (double& x : b.Xt.a) x = 0.5 * rng.normal();
  for (int i = 0; i < B; ++i) {
    for (int d = 0; d < m.flat_dim(); ++d) b.T.at(i, d) = b.Xt.at(i, d);
    b.w[i] = 1.0 + rng.uniform();
  }
  return b;
}

std::vector<double> rand_vec(int n, uint64_t seed, double scale) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

}  // namespace

TEST_CASE("modal-gain transition equals its assembled matrix form") {
  StudentModel m = tiny_model(Variant::Fdk, 11);
  Rng rng(3);
  Matrix P(4, 4), Q(4, 4);
  for (double& x : P.a) x = rng.normal();
  for (double& x : Q.a) x = rng.normal();
  set_fdk_P(m, P);
  set_fdk_Q(m, Q);

  for (int trial = 0; trial < 5; ++trial) {
    auto z = rand_vec(4, 100 + trial, 0.8);
    auto g = gamma_eval(m, z);
    auto got = fdk_apply(m, z);

    // K = P diag(g) Q assembled explicitly, then applied.
    Matrix D = Matrix::identity(4);
    for (int j = 0; j < 4; ++j) D.at(j, j) = g[j];
    Matrix K = matmul(matmul(P, D), Q);
    auto want = matvec(K, z);
    for (int j = 0; j < 4; ++j)
      CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-10));
  }
}

TEST_CASE("transition hand example and linearity") {
  StudentModel m = make_student(2, 2, Variant::Fdk, 4);
  Matrix P(2, 2), Q = Matrix::identity(2);
  P.at(0, 0) = 0;
  P.at(0, 1) = 1;
  P.at(1, 0) = 1;
  P.at(1, 1) = 0;
  set_fdk_P(m, P);
  set_fdk_Q(m, Q);
  // Zero-weight gain head with per-unit biases: gamma == (2, 3) everywhere.
  zero_final_layer(m.gamma_spec, m.theta.data() + m.gamma_off());
  double* gb = m.theta.data() + m.gamma_off() + m.gamma_spec.bias_offset(m.gamma_spec.layers() - 1);
  gb[0] = 2.0;
  gb[1] = 3.0;

  auto out = fdk_apply(m, {1.0, 1.0});
  CHECK(out[0] == 3.0);
  CHECK(out[1] == 2.0);

  // Constant gains make the map linear.
  StudentModel lin = make_student(2, 4, Variant::Fdk, 9);
  Rng rng(17);
  Matrix P4(4, 4), Q4(4, 4);
  for (double& x : P4.a) x = rng.normal();
  for (double& x : Q4.a) x = rng.normal();
  set_fdk_P(lin, P4);
  set_fdk_Q(lin, Q4);  // gains stay at the init value 1 (zero-weight head)
  auto za = rand_vec(4, 41, 1.0), zb = rand_vec(4, 42, 1.0);
  const double a = 0.7, bcoef = -1.3;
  std::vector<double> zc(4);
  for (int j = 0; j < 4; ++j) zc[j] = a * za[j] + bcoef * zb[j];
  auto fa = fdk_apply(lin, za), fb = fdk_apply(lin, zb), fc = fdk_apply(lin, zc);
  for (int j = 0; j < 4; ++j)
    CHECK(fc[j] == doctest::Approx(a * fa[j] + bcoef * fb[j]).epsilon(1e-10));
}

TEST_CASE("initial transition is the identity with zero inverse penalty") {
  StudentModel m = make_student(16, 64, Variant::Fdk, 2024);
  auto z = rand_vec(64, 7, 1.0);
  auto out = fdk_apply(m, z);
  for (int j = 0; j < 64; ++j) CHECK(std::abs(out[j] - z[j]) < 1e-6);

  StudentBatch b = random_batch(m, 2, 50);
  LossWeights only_inv;
  only_inv.a_pred = only_inv.a_rec = only_inv.a_lat = only_inv.a_act = only_inv.a_spec = 0.0;
  only_inv.a_inv = 1.0;
  LossBreakdown l = student_loss(m, b, only_inv, nullptr);
  CHECK(l.inv < 1e-12);
  CHECK(l.total == l.inv);

  // Exact-zero case and the hand-computed penalty value.
  StudentModel e = make_student(2, 2, Variant::Fdk, 3);
  set_fdk_P(e, Matrix::identity(2));
  set_fdk_Q(e, Matrix::identity(2));
  StudentBatch be = random_batch(e, 2, 51);
  CHECK(student_loss(e, be, only_inv, nullptr).inv == 0.0);
  Matrix P2 = Matrix::identity(2);
  P2.at(0, 0) = P2.at(1, 1) = 2.0;
  set_fdk_P(e, P2);
  CHECK(student_loss(e, be, only_inv, nullptr).inv == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("global linear baseline and its reduction relationship") {
  StudentModel k = make_student(2, 4, Variant::Kdm, 21);
  set_kdm_A(k, Matrix::identity(4));
  auto z = rand_vec(4, 9, 1.0);
  auto out = kdm_apply(k, z);
  for (int j = 0; j < 4; ++j) CHECK(out[j] == z[j]);

  // Same A through the gain machinery with Q=I, gains 1: identical map.
  Rng rng(33);
  Matrix A(4, 4);
  for (double& x : A.a) x = rng.normal();
  set_kdm_A(k, A);
  StudentModel f = make_student(2, 4, Variant::Fdk, 21);
  set_fdk_P(f, A);
  set_fdk_Q(f, Matrix::identity(4));
  for (int trial = 0; trial < 4; ++trial) {
    auto zt = rand_vec(4, 60 + trial, 0.9);
    auto via_k = kdm_apply(k, zt);
    auto via_f = fdk_apply(f, zt);
    for (int j = 0; j < 4; ++j) CHECK(via_f[j] == via_k[j]);
  }
}

TEST_CASE("gain hinge penalty matches direct arithmetic") {
  StudentModel m = make_student(2, 2, Variant::Fdk, 4);
  zero_final_layer(m.gamma_spec, m.theta.data() + m.gamma_off());
  double* gb = m.theta.data() + m.gamma_off() + m.gamma_spec.bias_offset(m.gamma_spec.layers() - 1);
  LossWeights only_spec;
  only_spec.a_pred = only_spec.a_rec = only_spec.a_lat = only_spec.a_act = only_spec.a_inv = 0.0;
  only_spec.a_spec = 1.0;
  StudentBatch b = random_batch(m, 3, 52);

  gb[0] = 0.5;
  gb[1] = -0.9;
  CHECK(student_loss(m, b, only_spec, nullptr).spec == 0.0);
  gb[0] = 1.5;
  gb[1] = 0.5;
  CHECK(student_loss(m, b, only_spec, nullptr).spec == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("perfectly reproducible pair yields zero data losses") {
  StudentModel m = make_student(2, 4, Variant::Fdk, 77);
  zero_final_layer(m.enc_spec, m.theta.data() + m.enc_off());
  zero_final_layer(m.dec_spec, m.theta.data() + m.dec_off());
  StudentBatch b;
  b.X = Matrix(1, m.in_dim());
  b.Xt = Matrix(1, m.in_dim());
  b.T = Matrix(1, m.flat_dim());
  b.w = {1.5};
  LossBreakdown l = student_loss(m, b, LossWeights{}, nullptr);
  CHECK(l.rec == 0.0);
  CHECK(l.lat == 0.0);
  CHECK(l.pred == 0.0);
  CHECK(l.act == 0.0);
  CHECK(l.spec == 0.0);
  CHECK(l.inv < 1e-12);
}

TEST_CASE("every loss term passes a finite-difference gradient check") {
  auto run = [](Variant v) {
    StudentModel m = tiny_model(v, 11);
    StudentBatch b = random_batch(m, 3, 53);
    if (v == Variant::Fdk) {
      // Guard: no gain may sit near the hinge kink, or FD is invalid.
      Matrix Z1;
      mlp_forward_batch(m.enc_spec, m.theta.data() + m.enc_off(), b.X, Z1, nullptr);
      Matrix G;
      mlp_forward_batch(m.gamma_spec, m.theta.data() + m.gamma_off(), Z1, G, nullptr);
      for (double g : G.a) REQUIRE(std::abs(std::abs(g) - 1.0) > 0.03);
    }
    // The latent-consistency target is a stop-gradient branch: the optimized
    // function treats it as a constant, so finite differences must too.
    Matrix Zconst(b.Xt.rows, m.latent);
    for (int i = 0; i < b.Xt.rows; ++i) {
      std::vector<double> xt(b.Xt.row(i), b.Xt.row(i) + m.in_dim());
      auto z = student_encode(m, xt);
      std::copy(z.begin(), z.end(), Zconst.row(i));
    }
    auto check_with = [&](const LossWeights& lw) {
      StudentModel probe = m;
      auto f = [&](const std::vector<double>& params, std::vector<double>* g) {
        probe.theta = params;
        if (!g) return student_loss(probe, b, lw, nullptr, &Zconst).total;
        g->assign(probe.param_count(), 0.0);
        return student_loss(probe, b, lw, g->data(), &Zconst).total;
      };
      return grad_check(f, m.theta, 1e-5);
    };

    const char* names[] = {"pred", "rec", "lat", "act", "spec", "inv"};
    for (int term = 0; term < 6; ++term) {
      if (v == Variant::Kdm && term >= 4) continue;  // structural terms absent
      LossWeights lw;
      lw.a_pred = term == 0 ? 1.0 : 0.0;
      lw.a_rec = term == 1 ? 1.0 : 0.0;
      lw.a_lat = term == 2 ? 1.0 : 0.0;
      lw.a_act = term == 3 ? 1.0 : 0.0;
      lw.a_spec = term == 4 ? 1.0 : 0.0;
      lw.a_inv = term == 5 ? 1.0 : 0.0;
      INFO("term ", std::string(names[term]));
      CHECK(check_with(lw) < 1e-4);
    }
    LossWeights full;  // default mixture
    CHECK(check_with(full) < 1e-4);
  };
  run(Variant::Fdk);
  run(Variant::Kdm);
}

TEST_CASE("latent-consistency target carries no gradient") {
  StudentModel m = tiny_model(Variant::Fdk, 19);
  StudentBatch b = random_batch(m, 4, 54);

  std::vector<double> g_full(m.param_count(), 0.0);
  student_loss(m, b, LossWeights{}, g_full.data());

  // Same target values supplied as a constant matrix: identical gradients.
  Matrix Zconst(4, m.latent);
  for (int i = 0; i < 4; ++i) {
    std::vector<double> xt(b.Xt.row(i), b.Xt.row(i) + m.in_dim());
    auto z = student_encode(m, xt);
    std::copy(z.begin(), z.end(), Zconst.row(i));
  }
  std::vector<double> g_const(m.param_count(), 0.0);
  LossBreakdown l2 = student_loss(m, b, LossWeights{}, g_const.data(), &Zconst);
  LossBreakdown l1 = student_loss(m, b, LossWeights{}, nullptr);
  CHECK(l1.total == l2.total);
  CHECK(g_full == g_const);
}

TEST_CASE("quality weights scale data terms linearly and leave structure alone") {
  StudentModel m = tiny_model(Variant::Fdk, 23);
  StudentBatch b = random_batch(m, 2, 55);
  // Two identical records, then raise one weight.
  for (int d = 0; d < m.in_dim(); ++d) {
    b.X.at(1, d) = b.X.at(0, d);
    b.Xt.at(1, d) = b.Xt.at(0, d);
  }
  for (int d = 0; d < m.flat_dim(); ++d) b.T.at(1, d) = b.T.at(0, d);
  b.w = {1.0, 1.0};
  LossBreakdown base = student_loss(m, b, LossWeights{}, nullptr);
  b.w = {1.0, 2.0};
  LossBreakdown up = student_loss(m, b, LossWeights{}, nullptr);
  CHECK(up.pred == doctest::Approx(1.5 * base.pred).epsilon(1e-12));
  CHECK(up.rec == doctest::Approx(1.5 * base.rec).epsilon(1e-12));
  CHECK(up.lat == doctest::Approx(1.5 * base.lat).epsilon(1e-12));
  CHECK(up.act == doctest::Approx(1.5 * base.act).epsilon(1e-12));
  CHECK(up.spec == base.spec);
  CHECK(up.inv == base.inv);
}

TEST_CASE("one-step inference touches each stage exactly once") {
  StudentModel m = make_student(16, 64, Variant::Fdk, 31);
  ConditionedPrior p;
  p.values = rand_vec(96, 71, 0.5);
  p.fixed_mask.assign(96, 0);
  p.ctx = rand_vec(kCtxDim, 72, 0.5);
  EvalCounts c;
  auto tau = student_forward(m, p, &c);
  CHECK(c.enc == 1);
  CHECK(c.trans == 1);
  CHECK(c.dec == 1);
  CHECK(tau.size() == 96);

  // Deterministic, and batched inference reproduces single rows bitwise.
  auto tau2 = student_forward(m, p);
  CHECK(tau == tau2);
  Matrix X(3, m.in_dim());
  Rng rng(73);
  for (double& x : X.a) x = 0.5 * rng.normal();
  std::copy(p.values.begin(), p.values.end(), X.row(1));
  std::copy(p.ctx.begin(), p.ctx.end(), X.row(1) + 96);
  Matrix out;
  student_forward_batch(m, X, out);
  for (int d = 0; d < 96; ++d) CHECK(out.at(1, d) == tau[d]);

  // Zeroed encoder collapses the latent to zero.
  StudentModel z = make_student(2, 4, Variant::Fdk, 5);
  std::fill(z.theta.begin(), z.theta.begin() + z.enc_spec.param_count(), 0.0);
  auto lat = student_encode(z, std::vector<double>(z.in_dim(), 0.7));
  for (double v : lat) CHECK(v == 0.0);
}

namespace {

DistillDataset synthetic_dataset(int M, int H, uint64_t seed) {
  DistillDataset ds;
  ds.H = H;
  ds.N = 8;
  Rng rng(seed);
  for (int i = 0; i < M; ++i) {
    DistillPair p;
    const int flat = H * kStepDim;
    p.prior.values = rand_vec(flat, derive_seed(seed, 2 * i), 0.5);
    p.prior.fixed_mask.assign(flat, 0);
    for (int d = 0; d < kStateDim; ++d) p.prior.fixed_mask[d] = 1;
    p.prior.ctx = rand_vec(kCtxDim, derive_seed(seed, 2 * i + 1), 0.5);
    p.target = rand_vec(flat, derive_seed(seed, 1000 + i), 0.4);
    for (int d = 0; d < kStateDim; ++d) p.target[d] = p.prior.values[d];
    p.score = rng.normal();
    p.weight = 1.0 + rng.uniform();
    ds.pairs.push_back(std::move(p));
  }
  return ds;
}

}  // namespace

TEST_CASE("student training overfits a small set and replays bitwise") {
  DistillDataset ds = synthetic_dataset(10, 16, 99);
  StudentModel m = make_student(16, 64, Variant::Fdk, 7);
  TrainResult r = train_student(m, ds, LossWeights{}, 1200, 10, 1e-3, 13);
  REQUIRE(!r.diverged);
  REQUIRE(r.epochs_done == 1200);
  CHECK(r.curve.back().pred < 0.01 * r.curve.front().pred);

  StudentModel m2 = make_student(16, 64, Variant::Fdk, 7);
  TrainResult r2 = train_student(m2, ds, LossWeights{}, 40, 10, 1e-3, 13);
  for (int e = 0; e < 40; ++e) {
    CHECK(r.curve[e].total == r2.curve[e].total);
    CHECK(r.curve[e].pred == r2.curve[e].pred);
  }

  // The baseline variant trains through the same plumbing.
  StudentModel k = make_student(16, 64, Variant::Kdm, 7);
  TrainResult rk = train_student(k, ds, LossWeights{}, 60, 10, 1e-3, 13);
  REQUIRE(!rk.diverged);
  CHECK(rk.curve.back().total < rk.curve.front().total);
  for (const auto& e : rk.curve) {
    CHECK(e.spec == 0.0);
    CHECK(e.inv == 0.0);
  }
}

TEST_CASE("divergence restores the last good checkpoint") {
  DistillDataset ds = synthetic_dataset(6, 16, 101);
  ds.pairs[3].target[17] = std::numeric_limits<double>::infinity();
  StudentModel m = make_student(16, 32, Variant::Fdk, 7);
  const std::vector<double> before = m.theta;
  TrainResult r = train_student(m, ds, LossWeights{}, 5, 6, 1e-3, 13);
  CHECK(r.diverged);
  CHECK(r.epochs_done == 0);
  CHECK(r.curve.empty());
  CHECK(m.theta == before);
}
