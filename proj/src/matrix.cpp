#include "dnk/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace dnk {

Matrix matmul(const Matrix& A, const Matrix& B) {
  require(A.cols == B.rows, "matmul: inner dimension mismatch");
  Matrix C(A.rows, B.cols);
  gemm_nn(A.a.data(), A.rows, A.cols, B.a.data(), B.cols, C.a.data(), false);
  return C;
}

Matrix transpose(const Matrix& A) {
  Matrix T(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T.at(j, i) = A.at(i, j);
  return T;
}

std::vector<double> matvec(const Matrix& A, const std::vector<double>& x) {
  require(int(x.size()) == A.cols, "matvec: dimension mismatch");
  std::vector<double> y(A.rows, 0.0);
  for (int i = 0; i < A.rows; ++i) {
    const double* Ai = A.row(i);
    double acc = 0.0;
    for (int j = 0; j < A.cols; ++j) acc = std::fma(Ai[j], x[j], acc);
    y[i] = acc;
  }
  return y;
}

Matrix inverse(const Matrix& A) {
  require(A.rows == A.cols, "inverse: square matrix required");
  int n = A.rows;
  Matrix M = A;
  Matrix inv = Matrix::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::fabs(M.at(col, col));
    for (int r = col + 1; r < n; ++r) {
      double v = std::fabs(M.at(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    require(best > 1e-12, "inverse: singular matrix");
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(M.at(piv, j), M.at(col, j));
        std::swap(inv.at(piv, j), inv.at(col, j));
      }
    }
    double d = M.at(col, col);
    for (int j = 0; j < n; ++j) {
      M.at(col, j) /= d;
      inv.at(col, j) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = M.at(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        M.at(r, j) -= f * M.at(col, j);
        inv.at(r, j) -= f * inv.at(col, j);
      }
    }
  }
  return inv;
}

double frobenius_sq(const Matrix& A) {
  double s = 0.0;
  for (double v : A.a) s += v * v;
  return s;
}

void add_row(Matrix& Y, const std::vector<double>& b) {
  require(int(b.size()) == Y.cols, "add_row: width mismatch");
  for (int i = 0; i < Y.rows; ++i) {
    double* yi = Y.row(i);
    for (int j = 0; j < Y.cols; ++j) yi[j] += b[j];
  }
}

}  // namespace dnk
