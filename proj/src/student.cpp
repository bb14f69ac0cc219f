#include "dnk/student.hpp"

#include <algorithm>

#include "dnk/rng.hpp"

namespace dnk {

size_t StudentModel::gamma_off() const {
  require(variant == Variant::Fdk, "gamma_off: not an FDK model");
  return enc_spec.param_count();
}

size_t StudentModel::pt_off() const { return gamma_off() + gamma_spec.param_count(); }

size_t StudentModel::qt_off() const { return pt_off() + size_t(latent) * latent; }

size_t StudentModel::at_off() const {
  require(variant == Variant::Kdm, "at_off: not a KDM model");
  return enc_spec.param_count();
}

size_t StudentModel::dec_off() const {
  if (variant == Variant::Fdk) return qt_off() + size_t(latent) * latent;
  return at_off() + size_t(latent) * latent;
}

size_t StudentModel::param_count() const { return dec_off() + dec_spec.param_count(); }

StudentModel make_student(int H, int latent, Variant variant, uint64_t seed) {
  require(H >= 1 && latent >= 1, "make_student: bad sizes");
  StudentModel m;
  m.H = H;
  m.latent = latent;
  m.variant = variant;
  const int flat = m.flat_dim();
  m.enc_spec.dims = {flat + kCtxDim, 4 * latent, 4 * latent, latent};
  m.enc_spec.hidden = Act::Tanh;
  m.gamma_spec.dims = {latent, 2 * latent, latent};
  m.gamma_spec.hidden = Act::Tanh;
  m.dec_spec.dims = {latent, 4 * latent, 4 * latent, flat};
  m.dec_spec.hidden = Act::Tanh;
  m.theta.assign(m.param_count(), 0.0);

  Rng rng(seed);
  init_mlp(m.enc_spec, m.theta.data() + m.enc_off(), rng);
  if (variant == Variant::Fdk) {
    init_mlp(m.gamma_spec, m.theta.data() + m.gamma_off(), rng);
    zero_final_layer(m.gamma_spec, m.theta.data() + m.gamma_off());
    set_final_bias(m.gamma_spec, m.theta.data() + m.gamma_off(), 1.0);

    Matrix P = Matrix::identity(latent);
    for (int i = 0; i < latent; ++i)
      for (int j = 0; j < latent; ++j)
        if (i != j) P.at(i, j) = 1e-3 * rng.normal();
    Matrix Q = inverse(P);
    set_fdk_P(m, P);
    set_fdk_Q(m, Q);
  } else {
    Matrix A = Matrix::identity(latent);
    for (int i = 0; i < latent; ++i)
      for (int j = 0; j < latent; ++j)
        if (i != j) A.at(i, j) = 1e-3 * rng.normal();
    set_kdm_A(m, A);
  }
  init_mlp(m.dec_spec, m.theta.data() + m.dec_off(), rng);
  return m;
}

namespace {

// Writes M^T (math orientation in, transposed storage out).
void store_transposed(const Matrix& M, double* dst, int L) {
  require(M.rows == L && M.cols == L, "student: square matrix size mismatch");
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) dst[size_t(j) * L + i] = M.at(i, j);
}

Matrix load_transposed(const double* src, int L) {
  Matrix M(L, L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) M.at(i, j) = src[size_t(j) * L + i];
  return M;
}

}  // namespace

void set_fdk_P(StudentModel& m, const Matrix& P) {
  store_transposed(P, m.theta.data() + m.pt_off(), m.latent);
}
void set_fdk_Q(StudentModel& m, const Matrix& Q) {
  store_transposed(Q, m.theta.data() + m.qt_off(), m.latent);
}
void set_kdm_A(StudentModel& m, const Matrix& A) {
  store_transposed(A, m.theta.data() + m.at_off(), m.latent);
}
Matrix get_fdk_P(const StudentModel& m) {
  return load_transposed(m.theta.data() + m.pt_off(), m.latent);
}
Matrix get_fdk_Q(const StudentModel& m) {
  return load_transposed(m.theta.data() + m.qt_off(), m.latent);
}
Matrix get_kdm_A(const StudentModel& m) {
  return load_transposed(m.theta.data() + m.at_off(), m.latent);
}

std::vector<double> student_encode(const StudentModel& m, const std::vector<double>& x,
                                   EvalCounts* counts) {
  require(int(x.size()) == m.in_dim(), "student_encode: input width mismatch");
  if (counts) ++counts->enc;
  return mlp_forward(m.enc_spec, m.theta.data() + m.enc_off(), x);
}

std::vector<double> gamma_eval(const StudentModel& m, const std::vector<double>& z) {
  require(m.variant == Variant::Fdk, "gamma_eval: not an FDK model");
  require(int(z.size()) == m.latent, "gamma_eval: latent width mismatch");
  return mlp_forward(m.gamma_spec, m.theta.data() + m.gamma_off(), z);
}

std::vector<double> fdk_apply(const StudentModel& m, const std::vector<double>& z,
                              EvalCounts* counts) {
  require(m.variant == Variant::Fdk, "fdk_apply: not an FDK model");
  require(int(z.size()) == m.latent, "fdk_apply: latent width mismatch");
  const int L = m.latent;
  std::vector<double> g = gamma_eval(m, z);
  require(all_finite(g), "fdk_apply: non-finite gains");
  if (counts) ++counts->trans;
  std::vector<double> u(L, 0.0), out(L, 0.0);
  // u = Q z via the transposed block, then out = P (u .* g).
  gemm_nn(z.data(), 1, L, m.theta.data() + m.qt_off(), L, u.data(), false);
  for (int j = 0; j < L; ++j) u[j] *= g[j];
  gemm_nn(u.data(), 1, L, m.theta.data() + m.pt_off(), L, out.data(), false);
  return out;
}

std::vector<double> kdm_apply(const StudentModel& m, const std::vector<double>& z,
                              EvalCounts* counts) {
  require(m.variant == Variant::Kdm, "kdm_apply: not a KDM model");
  require(int(z.size()) == m.latent, "kdm_apply: latent width mismatch");
  if (counts) ++counts->trans;
  std::vector<double> out(m.latent, 0.0);
  gemm_nn(z.data(), 1, m.latent, m.theta.data() + m.at_off(), m.latent, out.data(), false);
  return out;
}

std::vector<double> student_decode(const StudentModel& m, const std::vector<double>& z,
                                   EvalCounts* counts) {
  require(int(z.size()) == m.latent, "student_decode: latent width mismatch");
  if (counts) ++counts->dec;
  return mlp_forward(m.dec_spec, m.theta.data() + m.dec_off(), z);
}

void student_forward_batch(const StudentModel& m, const Matrix& X, Matrix& out,
                           EvalCounts* counts) {
  require(X.cols == m.in_dim(), "student_forward: input width mismatch");
  const int B = X.rows;
  const int L = m.latent;
  Matrix Z1;
  mlp_forward_batch(m.enc_spec, m.theta.data() + m.enc_off(), X, Z1, nullptr);
  if (counts) counts->enc += B;

  Matrix Z0(B, L);
  if (m.variant == Variant::Fdk) {
    Matrix G;
    mlp_forward_batch(m.gamma_spec, m.theta.data() + m.gamma_off(), Z1, G, nullptr);
    Matrix U(B, L);
    gemm_nn(Z1.a.data(), B, L, m.theta.data() + m.qt_off(), L, U.a.data(), false);
    for (int i = 0; i < B; ++i) {
      double* u = U.row(i);
      const double* g = G.row(i);
      for (int j = 0; j < L; ++j) u[j] *= g[j];
    }
    gemm_nn(U.a.data(), B, L, m.theta.data() + m.pt_off(), L, Z0.a.data(), false);
  } else {
    gemm_nn(Z1.a.data(), B, L, m.theta.data() + m.at_off(), L, Z0.a.data(), false);
  }
  if (counts) counts->trans += B;

  mlp_forward_batch(m.dec_spec, m.theta.data() + m.dec_off(), Z0, out, nullptr);
  if (counts) counts->dec += B;
}

std::vector<double> student_forward(const StudentModel& m, const ConditionedPrior& prior,
                                    EvalCounts* counts) {
  const int flat = m.flat_dim();
  require(int(prior.values.size()) == flat && int(prior.ctx.size()) == kCtxDim,
          "student_forward: prior shape mismatch");
  Matrix X(1, m.in_dim());
  std::copy(prior.values.begin(), prior.values.end(), X.row(0));
  std::copy(prior.ctx.begin(), prior.ctx.end(), X.row(0) + flat);
  Matrix out;
  student_forward_batch(m, X, out, counts);
  return out.a;
}

}  // namespace dnk
