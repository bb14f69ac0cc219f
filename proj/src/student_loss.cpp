#include <algorithm>
#include <cmath>

#include "dnk/student.hpp"

namespace dnk {

StudentBatch make_batch(const DistillDataset& ds, const std::vector<int>& idx) {
  const int B = static_cast<int>(idx.size());
  require(B > 0, "make_batch: empty index list");
  const int flat = ds.H * kStepDim;
  StudentBatch b;
  b.X = Matrix(B, flat + kCtxDim);
  b.Xt = Matrix(B, flat + kCtxDim);
  b.T = Matrix(B, flat);
  b.w.resize(B);
  for (int i = 0; i < B; ++i) {
    const DistillPair& p = ds.pairs.at(idx[i]);
    require(static_cast<int>(p.prior.values.size()) == flat &&
                static_cast<int>(p.prior.ctx.size()) == kCtxDim &&
                p.target.size() == p.prior.values.size(),
            "make_batch: record shape mismatch");
    std::copy(p.prior.values.begin(), p.prior.values.end(), b.X.row(i));
    std::copy(p.prior.ctx.begin(), p.prior.ctx.end(), b.X.row(i) + flat);
    std::copy(p.target.begin(), p.target.end(), b.Xt.row(i));
    std::copy(p.prior.ctx.begin(), p.prior.ctx.end(), b.Xt.row(i) + flat);
    std::copy(p.target.begin(), p.target.end(), b.T.row(i));
    b.w[i] = p.weight;
  }
  return b;
}

LossBreakdown student_loss(const StudentModel& m, const StudentBatch& b, const LossWeights& lw,
                           double* grads, const Matrix* lat_override) {
  const int B = b.X.rows;
  const int L = m.latent;
  const int F = m.flat_dim();
  require(B > 0 && b.X.cols == m.in_dim() && b.Xt.rows == B && b.Xt.cols == m.in_dim() &&
              b.T.rows == B && b.T.cols == F && static_cast<int>(b.w.size()) == B,
          "student_loss: batch shape mismatch");
  const bool fdk = m.variant == Variant::Fdk;
  const double* theta = m.theta.data();
  if (grads) std::fill(grads, grads + m.param_count(), 0.0);

  // ---- forward ----
  MlpCache cEncPrior, cGamma, cDecPred, cEncTgt, cDecRec;
  Matrix Z1;
  mlp_forward_batch(m.enc_spec, theta + m.enc_off(), b.X, Z1, grads ? &cEncPrior : nullptr);

  Matrix G, U, V, Z0(B, L);
  if (fdk) {
    mlp_forward_batch(m.gamma_spec, theta + m.gamma_off(), Z1, G, grads ? &cGamma : nullptr);
    U = Matrix(B, L);
    gemm_nn(Z1.a.data(), B, L, theta + m.qt_off(), L, U.a.data(), false);
    V = U;
    for (int i = 0; i < B; ++i) {
      double* v = V.row(i);
      const double* g = G.row(i);
      for (int j = 0; j < L; ++j) v[j] *= g[j];
    }
    gemm_nn(V.a.data(), B, L, theta + m.pt_off(), L, Z0.a.data(), false);
  } else {
    gemm_nn(Z1.a.data(), B, L, theta + m.at_off(), L, Z0.a.data(), false);
  }

  Matrix Pred;
  mlp_forward_batch(m.dec_spec, theta + m.dec_off(), Z0, Pred, grads ? &cDecPred : nullptr);

  Matrix Zt;  // encoded teacher sample: rec branch input, lat target (sg)
  mlp_forward_batch(m.enc_spec, theta + m.enc_off(), b.Xt, Zt, grads ? &cEncTgt : nullptr);
  const Matrix& Zlat = lat_override ? *lat_override : Zt;
  require(Zlat.rows == B && Zlat.cols == L, "student_loss: lat target shape mismatch");

  Matrix Rec;
  mlp_forward_batch(m.dec_spec, theta + m.dec_off(), Zt, Rec, grads ? &cDecRec : nullptr);

  // ---- loss terms ----
  LossBreakdown out;
  for (int i = 0; i < B; ++i) {
    const double wi = b.w[i] / B;
    double pred = 0.0, act = 0.0, rec = 0.0, lat = 0.0;
    const double* pr = Pred.row(i);
    const double* rr = Rec.row(i);
    const double* tr = b.T.row(i);
    for (int d = 0; d < F; ++d) {
      const double rp = pr[d] - tr[d];
      pred += rp * rp;
      const double rc = rr[d] - tr[d];
      rec += rc * rc;
    }
    for (int t = 0; t < m.H; ++t) {
      const double wt = (t == 0) ? lw.act_w1 : lw.act_wtail;
      for (int d = kStateDim; d < kStepDim; ++d) {
        const double ra = pr[t * kStepDim + d] - tr[t * kStepDim + d];
        act += wt * ra * ra;
      }
    }
    const double* z0 = Z0.row(i);
    const double* zl = Zlat.row(i);
    for (int j = 0; j < L; ++j) {
      const double rl = z0[j] - zl[j];
      lat += rl * rl;
    }
    out.pred += wi * pred;
    out.act += wi * act;
    out.rec += wi * rec;
    out.lat += wi * lat;
  }

  Matrix S;  // Q^T-storage times P^T-storage minus I; Frobenius norm matches PQ - I
  if (fdk) {
    for (int i = 0; i < B; ++i) {
      const double* g = G.row(i);
      for (int j = 0; j < L; ++j) out.spec += std::max(0.0, std::abs(g[j]) - 1.0);
    }
    out.spec /= double(B) * L;

    S = Matrix(L, L);
    gemm_nn(theta + m.qt_off(), L, L, theta + m.pt_off(), L, S.a.data(), false);
    for (int i = 0; i < L; ++i) S.at(i, i) -= 1.0;
    for (double s : S.a) out.inv += s * s;
  }

  out.total = lw.a_pred * out.pred + lw.a_rec * out.rec + lw.a_lat * out.lat +
              lw.a_act * out.act + lw.a_spec * out.spec + lw.a_inv * out.inv;
  if (!grads) return out;

  // ---- backward ----
  Matrix dPred(B, F);
  for (int i = 0; i < B; ++i) {
    const double wi = b.w[i] / B;
    const double* pr = Pred.row(i);
    const double* tr = b.T.row(i);
    double* dp = dPred.row(i);
    for (int d = 0; d < F; ++d) dp[d] = 2.0 * lw.a_pred * wi * (pr[d] - tr[d]);
    for (int t = 0; t < m.H; ++t) {
      const double wt = (t == 0) ? lw.act_w1 : lw.act_wtail;
      for (int d = kStateDim; d < kStepDim; ++d) {
        const int idx = t * kStepDim + d;
        dp[idx] += 2.0 * lw.a_act * wi * wt * (pr[idx] - tr[idx]);
      }
    }
  }
  Matrix dZ0;
  mlp_backward_batch(m.dec_spec, theta + m.dec_off(), cDecPred, dPred, grads + m.dec_off(), &dZ0);
  for (int i = 0; i < B; ++i) {
    const double wi = b.w[i] / B;
    double* dz = dZ0.row(i);
    const double* z0 = Z0.row(i);
    const double* zl = Zlat.row(i);
    for (int j = 0; j < L; ++j) dz[j] += 2.0 * lw.a_lat * wi * (z0[j] - zl[j]);
  }

  Matrix dRec(B, F);
  for (int i = 0; i < B; ++i) {
    const double wi = b.w[i] / B;
    const double* rr = Rec.row(i);
    const double* tr = b.T.row(i);
    double* dr = dRec.row(i);
    for (int d = 0; d < F; ++d) dr[d] = 2.0 * lw.a_rec * wi * (rr[d] - tr[d]);
  }
  Matrix dZt;
  mlp_backward_batch(m.dec_spec, theta + m.dec_off(), cDecRec, dRec, grads + m.dec_off(), &dZt);
  // Reconstruction is the only path into the target encoding: the latent
  // consistency residual never reaches it (stop-gradient).
  mlp_backward_batch(m.enc_spec, theta + m.enc_off(), cEncTgt, dZt, grads + m.enc_off(), nullptr);

  Matrix dZ1(B, L);
  if (fdk) {
    Matrix Pt(L, L), Qt(L, L);
    std::copy(theta + m.pt_off(), theta + m.pt_off() + size_t(L) * L, Pt.a.begin());
    std::copy(theta + m.qt_off(), theta + m.qt_off() + size_t(L) * L, Qt.a.begin());
    Matrix PtT = transpose(Pt);
    Matrix QtT = transpose(Qt);

    Matrix dV(B, L);
    gemm_nn(dZ0.a.data(), B, L, PtT.a.data(), L, dV.a.data(), false);
    gemm_tn(V.a.data(), B, L, dZ0.a.data(), L, grads + m.pt_off(), true);

    Matrix dG(B, L), dU(B, L);
    const double hinge = lw.a_spec / (double(B) * L);
    for (int i = 0; i < B; ++i) {
      const double* dv = dV.row(i);
      const double* u = U.row(i);
      const double* g = G.row(i);
      double* dg = dG.row(i);
      double* du = dU.row(i);
      for (int j = 0; j < L; ++j) {
        dg[j] = dv[j] * u[j];
        if (std::abs(g[j]) > 1.0) dg[j] += hinge * (g[j] > 0.0 ? 1.0 : -1.0);
        du[j] = dv[j] * g[j];
      }
    }
    Matrix dZ1a(B, L);
    gemm_nn(dU.a.data(), B, L, QtT.a.data(), L, dZ1a.a.data(), false);
    gemm_tn(Z1.a.data(), B, L, dU.a.data(), L, grads + m.qt_off(), true);

    Matrix dZ1b;
    mlp_backward_batch(m.gamma_spec, theta + m.gamma_off(), cGamma, dG, grads + m.gamma_off(),
                       &dZ1b);
    for (int i = 0; i < B; ++i)
      for (int j = 0; j < L; ++j) dZ1.at(i, j) = dZ1a.at(i, j) + dZ1b.at(i, j);

    Matrix S2 = S;
    for (double& s : S2.a) s *= 2.0 * lw.a_inv;
    gemm_nn(S2.a.data(), L, L, PtT.a.data(), L, grads + m.qt_off(), true);
    gemm_tn(Qt.a.data(), L, L, S2.a.data(), L, grads + m.pt_off(), true);
  } else {
    Matrix At(L, L);
    std::copy(theta + m.at_off(), theta + m.at_off() + size_t(L) * L, At.a.begin());
    Matrix AtT = transpose(At);
    gemm_nn(dZ0.a.data(), B, L, AtT.a.data(), L, dZ1.a.data(), false);
    gemm_tn(Z1.a.data(), B, L, dZ0.a.data(), L, grads + m.at_off(), true);
  }
  mlp_backward_batch(m.enc_spec, theta + m.enc_off(), cEncPrior, dZ1, grads + m.enc_off(),
                     nullptr);
  return out;
}

}  // namespace dnk
