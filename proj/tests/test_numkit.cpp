#include <cmath>

#include "dnk/adam.hpp"
#include "dnk/gradcheck.hpp"
#include "dnk/matrix.hpp"
#include "dnk/mlp.hpp"
#include "dnk/pca.hpp"
#include "dnk/rng.hpp"
#include "doctest.h"

using namespace dnk;

namespace {

// Naive k-ascending fma triple loop; same per-element reduction semantics as
// gemm_nn, so results must match bitwise.
Matrix naive_matmul(const Matrix& A, const Matrix& B) {
  Matrix C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < B.cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < A.cols; ++k) acc = std::fma(A.at(i, k), B.at(k, j), acc);
      C.at(i, j) = acc;
    }
  return C;
}

Matrix random_matrix(int r, int c, Rng& rng) {
  Matrix M(r, c);
  for (double& v : M.a) v = rng.normal();
  return M;
}

}  // namespace

TEST_CASE("rng determinism and stream isolation") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));

  Rng u(9);
  for (int i = 0; i < 1000; ++i) {
    double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    double y = u.uniform_pos();
    CHECK(y > 0.0);
    CHECK(y <= 1.0);
  }

  // Box-Muller moments over many draws.
  Rng g(123);
  double s = 0, s2 = 0;
  int n = 200000;
  for (int i = 0; i < n; ++i) {
    double z = g.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::fabs(s / n) < 0.02);
  CHECK(std::fabs(s2 / n - 1.0) < 0.02);

  std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8}, v2 = v1;
  Rng sh1(5), sh2(5);
  sh1.shuffle(v1);
  sh2.shuffle(v2);
  CHECK(v1 == v2);
}

TEST_CASE("gemm matches naive loop bitwise and is row-stable") {
  Rng rng(11);
  Matrix A = random_matrix(13, 37, rng);
  Matrix B = random_matrix(37, 29, rng);
  Matrix C = matmul(A, B);
  Matrix Cn = naive_matmul(A, B);
  for (size_t i = 0; i < C.a.size(); ++i) CHECK(C.a[i] == Cn.a[i]);

  // Row computed alone must equal the same row inside the batch, bitwise.
  for (int i : {0, 5, 12}) {
    Matrix Ai(1, A.cols);
    for (int j = 0; j < A.cols; ++j) Ai.at(0, j) = A.at(i, j);
    Matrix Ci = matmul(Ai, B);
    for (int j = 0; j < C.cols; ++j) CHECK(Ci.at(0, j) == C.at(i, j));
  }

  // gemm_tn equals transpose-then-multiply.
  Matrix D = random_matrix(13, 8, rng);
  Matrix G1(A.cols, D.cols);
  gemm_tn(A.a.data(), A.rows, A.cols, D.a.data(), D.cols, G1.a.data(), false);
  Matrix G2 = matmul(transpose(A), D);
  for (size_t i = 0; i < G1.a.size(); ++i) CHECK(G1.a[i] == doctest::Approx(G2.a[i]).epsilon(1e-13));
}

TEST_CASE("matrix inverse round trip") {
  Rng rng(3);
  Matrix A = Matrix::identity(12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      if (i != j) A.at(i, j) = 0.1 * rng.normal();
  Matrix Ai = inverse(A);
  Matrix P = matmul(A, Ai);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) CHECK(P.at(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
}

TEST_CASE("mlp forward zero and identity cases") {
  MlpSpec spec{{3, 3}, Act::Tanh};
  std::vector<double> theta(spec.param_count(), 0.0);
  auto y = mlp_forward(spec, theta.data(), {1.0, -2.0, 3.0});
  for (double v : y) CHECK(v == 0.0);

  // identity weights, single layer (identity output activation)
  for (int i = 0; i < 3; ++i) theta[spec.weight_offset(0) + i * 3 + i] = 1.0;
  y = mlp_forward(spec, theta.data(), {1.0, -2.0, 3.0});
  CHECK(y[0] == 1.0);
  CHECK(y[1] == -2.0);
  CHECK(y[2] == 3.0);
}

TEST_CASE("mlp forward matches independent scalar oracle") {
  MlpSpec spec{{2, 2, 1}, Act::Tanh};
  std::vector<double> theta(spec.param_count());
  // W1 in-major (input i -> unit j), b1, W2, b2
  theta[0] = 0.3;   // w(0,0)
  theta[1] = -0.2;  // w(0,1)
  theta[2] = 0.5;   // w(1,0)
  theta[3] = 0.1;   // w(1,1)
  theta[4] = 0.1;   // b1_0
  theta[5] = -0.3;  // b1_1
  theta[6] = 0.7;   // w2_0
  theta[7] = -0.4;  // w2_1
  theta[8] = 0.2;   // b2
  double x0 = 0.9, x1 = -1.1;
  double h0 = std::tanh(x0 * 0.3 + x1 * 0.5 + 0.1);
  double h1 = std::tanh(x0 * -0.2 + x1 * 0.1 - 0.3);
  double expect = h0 * 0.7 + h1 * -0.4 + 0.2;
  auto y = mlp_forward(spec, theta.data(), {x0, x1});
  CHECK(y[0] == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("mlp backward trivial cases") {
  // f(x) = x via identity layer: input grad = upstream
  MlpSpec id{{2, 2}, Act::Tanh};
  std::vector<double> theta(id.param_count(), 0.0);
  theta[id.weight_offset(0) + 0] = 1.0;
  theta[id.weight_offset(0) + 3] = 1.0;
  Matrix X(1, 2);
  X.at(0, 0) = 0.4;
  X.at(0, 1) = -0.7;
  Matrix Y;
  MlpCache cache;
  mlp_forward_batch(id, theta.data(), X, Y, &cache);
  Matrix dY(1, 2);
  dY.at(0, 0) = 2.5;
  dY.at(0, 1) = -1.5;
  std::vector<double> g(id.param_count(), 0.0);
  Matrix dX;
  mlp_backward_batch(id, theta.data(), cache, dY, g.data(), &dX);
  CHECK(dX.at(0, 0) == 2.5);
  CHECK(dX.at(0, 1) == -1.5);

  // scalar f(x) = w x: grad_w = x, input_grad = w
  MlpSpec sc{{1, 1}, Act::Tanh};
  std::vector<double> th(sc.param_count(), 0.0);
  th[0] = 1.7;  // w
  Matrix Xs(1, 1);
  Xs.at(0, 0) = 3.0;
  MlpCache cs;
  Matrix Ys;
  mlp_forward_batch(sc, th.data(), Xs, Ys, &cs);
  Matrix dYs(1, 1);
  dYs.at(0, 0) = 1.0;
  std::vector<double> gs(sc.param_count(), 0.0);
  Matrix dXs;
  mlp_backward_batch(sc, th.data(), cs, dYs, gs.data(), &dXs);
  CHECK(gs[0] == 3.0);   // dw
  CHECK(gs[1] == 1.0);   // db
  CHECK(dXs.at(0, 0) == 1.7);
}

TEST_CASE("mlp gradients pass finite-difference check") {
  for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    for (Act act : {Act::Tanh, Act::SmoothRelu}) {
      MlpSpec spec{{3, 5, 4, 2}, act};
      Rng rng(seed);
      std::vector<double> theta(spec.param_count());
      init_mlp(spec, theta.data(), rng);
      Matrix X(4, 3), T(4, 2);
      for (double& v : X.a) v = rng.normal();
      for (double& v : T.a) v = rng.normal();

      auto loss_fn = [&](const std::vector<double>& p, std::vector<double>* grad) {
        Matrix Y;
        MlpCache cache;
        mlp_forward_batch(spec, p.data(), X, Y, grad ? &cache : nullptr);
        double loss = 0.0;
        Matrix dY(Y.rows, Y.cols);
        for (size_t i = 0; i < Y.a.size(); ++i) {
          double r = Y.a[i] - T.a[i];
          loss += r * r;
          dY.a[i] = 2.0 * r;
        }
        if (grad) {
          grad->assign(p.size(), 0.0);
          mlp_backward_batch(spec, p.data(), cache, dY, grad->data(), nullptr);
        }
        return loss;
      };
      double err = grad_check(loss_fn, theta, 1e-6);
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("batched mlp forward equals per-sample forward bitwise") {
  MlpSpec spec{{6, 16, 5}, Act::Tanh};
  Rng rng(77);
  std::vector<double> theta(spec.param_count());
  init_mlp(spec, theta.data(), rng);
  Matrix X(9, 6);
  for (double& v : X.a) v = rng.normal();
  Matrix Y;
  mlp_forward_batch(spec, theta.data(), X, Y, nullptr);
  for (int i = 0; i < X.rows; ++i) {
    std::vector<double> xi(X.row(i), X.row(i) + 6);
    auto yi = mlp_forward(spec, theta.data(), xi);
    for (int j = 0; j < 5; ++j) CHECK(yi[j] == Y.at(i, j));
  }
}

TEST_CASE("grad_check on quadratic") {
  auto loss_fn = [](const std::vector<double>& p, std::vector<double>* grad) {
    double s = 0.0;
    for (double v : p) s += v * v;
    if (grad) {
      grad->resize(p.size());
      for (size_t i = 0; i < p.size(); ++i) (*grad)[i] = 2.0 * p[i];
    }
    return s;
  };
  CHECK(grad_check(loss_fn, {3.0}, 1e-6) < 1e-9);
}

TEST_CASE("adam zero gradient and first-step closed form") {
  std::vector<double> p{1.0, -2.0, 0.5};
  std::vector<double> p0 = p;
  AdamState st(3, 3e-4);
  std::vector<double> g{0.0, 0.0, 0.0};
  st.step(p.data(), g.data(), 3);
  CHECK(p == p0);
  CHECK(st.t == 1);

  AdamState st2(3, 3e-4);
  std::vector<double> q{1.0, -2.0, 0.5};
  std::vector<double> g2{0.3, -2.0, 1e-3};
  st2.step(q.data(), g2.data(), 3);
  for (int i = 0; i < 3; ++i) {
    double expect = (g2[i] > 0 ? -3e-4 : 3e-4);
    CHECK(q[i] - 1.0 * std::vector<double>{1.0, -2.0, 0.5}[i] ==
          doctest::Approx(expect).epsilon(1e-4));
  }

  // bitwise determinism across re-runs
  AdamState a1(3, 1e-3), a2(3, 1e-3);
  std::vector<double> x1{0.1, 0.2, 0.3}, x2{0.1, 0.2, 0.3};
  std::vector<double> gg{0.5, -0.25, 0.125};
  a1.step(x1.data(), gg.data(), 3);
  a1.step(x1.data(), gg.data(), 3);
  a2.step(x2.data(), gg.data(), 3);
  a2.step(x2.data(), gg.data(), 3);
  for (int i = 0; i < 3; ++i) CHECK(x1[i] == x2[i]);
}

TEST_CASE("pca collinear, cross, and reconstruction") {
  // collinear points: PC1 explains everything
  std::vector<std::vector<double>> line;
  for (int i = 0; i < 6; ++i) line.push_back({0.5 * i, -1.0 * i, 0.25 * i});
  auto r1 = pca_fit(line, 2);
  CHECK(r1.fractions[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r1.fractions[1] == doctest::Approx(0.0).epsilon(1e-10));

  // isotropic cross: covariance = I/2, fractions (0.5, 0.5)
  std::vector<std::vector<double>> cross{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  auto r2 = pca_fit(cross, 2);
  CHECK(r2.fractions[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(r2.fractions[1] == doctest::Approx(0.5).epsilon(1e-10));

  // orthonormal components, full reconstruction
  Rng rng(8);
  std::vector<std::vector<double>> data;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> s(5);
    for (double& v : s) v = rng.normal();
    data.push_back(s);
  }
  auto r3 = pca_fit(data, 5);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      double dot = 0.0;
      for (int j = 0; j < 5; ++j) dot += r3.components.at(a, j) * r3.components.at(b, j);
      CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-8));
    }
  double fsum = 0.0;
  for (int c = 0; c < 5; ++c) {
    fsum += r3.fractions[c];
    if (c > 0) CHECK(r3.fractions[c] <= r3.fractions[c - 1] + 1e-12);
  }
  CHECK(fsum <= 1.0 + 1e-8);
  CHECK(fsum == doctest::Approx(1.0).epsilon(1e-8));
  // reconstruct: mean + proj @ components == original
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 5; ++j) {
      double rec = r3.mean[j];
      for (int c = 0; c < 5; ++c) rec += r3.projections.at(i, c) * r3.components.at(c, j);
      CHECK(rec == doctest::Approx(data[i][j]).epsilon(1e-8));
    }
}
