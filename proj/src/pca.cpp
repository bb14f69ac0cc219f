#include "dnk/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dnk {

void jacobi_eigen(Matrix S, std::vector<double>& eigvals, Matrix& eigvecs) {
  require(S.rows == S.cols, "jacobi: square matrix required");
  int n = S.rows;
  eigvecs = Matrix::identity(n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::fabs(S.at(i, i)));
  scale = std::max(scale, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += S.at(p, q) * S.at(p, q);
    if (std::sqrt(off) < 1e-12 * scale * n) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double spq = S.at(p, q);
        if (std::fabs(spq) < 1e-300) continue;
        double tau = (S.at(q, q) - S.at(p, p)) / (2.0 * spq);
        double t = (tau >= 0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        for (int i = 0; i < n; ++i) {  // rotate rows/cols p,q of S
          double sip = S.at(i, p), siq = S.at(i, q);
          S.at(i, p) = c * sip - s * siq;
          S.at(i, q) = s * sip + c * siq;
        }
        for (int i = 0; i < n; ++i) {
          double spi = S.at(p, i), sqi = S.at(q, i);
          S.at(p, i) = c * spi - s * sqi;
          S.at(q, i) = s * spi + c * sqi;
        }
        for (int i = 0; i < n; ++i) {
          double vip = eigvecs.at(i, p), viq = eigvecs.at(i, q);
          eigvecs.at(i, p) = c * vip - s * viq;
          eigvecs.at(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  eigvals.resize(n);
  for (int i = 0; i < n; ++i) eigvals[i] = S.at(i, i);
}

PcaResult pca_fit(const std::vector<std::vector<double>>& samples, int k) {
  require(samples.size() >= 2, "pca_fit: need at least 2 samples");
  int n = int(samples.size());
  int d = int(samples[0].size());
  require(k >= 1 && k <= d, "pca_fit: k out of range");
  for (auto& s : samples) require(int(s.size()) == d, "pca_fit: ragged samples");

  PcaResult res;
  res.mean.assign(d, 0.0);
  for (auto& s : samples)
    for (int j = 0; j < d; ++j) res.mean[j] += s[j];
  for (int j = 0; j < d; ++j) res.mean[j] /= n;

  Matrix Xc(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) Xc.at(i, j) = samples[i][j] - res.mean[j];

  Matrix cov(d, d);
  gemm_tn(Xc.a.data(), n, d, Xc.a.data(), d, cov.a.data(), false);
  for (double& v : cov.a) v /= n;  // population (1/n) convention

  std::vector<double> eigvals;
  Matrix eigvecs;
  jacobi_eigen(cov, eigvals, eigvecs);

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return eigvals[a] > eigvals[b]; });

  double total = 0.0;
  for (double v : eigvals) total += std::max(v, 0.0);

  res.components = Matrix(k, d);
  res.fractions.assign(k, 0.0);
  for (int c = 0; c < k; ++c) {
    int idx = order[c];
    for (int j = 0; j < d; ++j) res.components.at(c, j) = eigvecs.at(j, idx);
    res.fractions[c] = total > 0.0 ? std::max(eigvals[idx], 0.0) / total : 0.0;
  }

  Matrix compT = transpose(res.components);
  res.projections = Matrix(n, k);
  gemm_nn(Xc.a.data(), n, d, compT.a.data(), k, res.projections.a.data(), false);
  return res;
}

}  // namespace dnk
