#pragma once
#include <cmath>
#include <vector>

#include "dnk/common.hpp"

namespace dnk {

// Row-major dense matrix. 64-bit is the training/checking representation;
// the 32-bit inference path for latency benchmarking lives in mlp.hpp.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(size_t(r) * c, 0.0) {}

  double& at(int r, int c) { return a[size_t(r) * cols + c]; }
  double at(int r, int c) const { return a[size_t(r) * cols + c]; }
  double* row(int r) { return a.data() + size_t(r) * cols; }
  const double* row(int r) const { return a.data() + size_t(r) * cols; }
  void zero() { std::fill(a.begin(), a.end(), 0.0); }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
};

// C (MxN) = A (MxK) @ B (KxN), optionally accumulating into C.
// Every output element is reduced in ascending-k order with one fma per step,
// in every code path (main tile and remainders). Consequences relied on
// throughout the artifact:
//   - any row of a batched product is bitwise identical to the same row
//     computed alone (batching/chunking/evaluation order never change values);
//   - results match a naive fma triple loop bitwise.
// The 4x16 register tile exists only to give the FMA units independent chains.
template <class T>
void gemm_nn(const T* A, int M, int K, const T* B, int N, T* C, bool accumulate) {
  constexpr int MR = 4, TJ = 16;
  for (int i0 = 0; i0 < M; i0 += MR) {
    int iw = M - i0 < MR ? M - i0 : MR;
    for (int j0 = 0; j0 < N; j0 += TJ) {
      int jw = N - j0 < TJ ? N - j0 : TJ;
      if (iw == MR && jw == TJ) {
        T acc[MR][TJ];
        for (int r = 0; r < MR; ++r)
          for (int j = 0; j < TJ; ++j)
            acc[r][j] = accumulate ? C[size_t(i0 + r) * N + j0 + j] : T(0);
        const T* A0 = A + size_t(i0) * K;
        const T* A1 = A0 + K;
        const T* A2 = A1 + K;
        const T* A3 = A2 + K;
        for (int k = 0; k < K; ++k) {
          const T* Bk = B + size_t(k) * N + j0;
          T a0 = A0[k], a1 = A1[k], a2 = A2[k], a3 = A3[k];
          for (int j = 0; j < TJ; ++j) {
            T b = Bk[j];
            acc[0][j] = std::fma(a0, b, acc[0][j]);
            acc[1][j] = std::fma(a1, b, acc[1][j]);
            acc[2][j] = std::fma(a2, b, acc[2][j]);
            acc[3][j] = std::fma(a3, b, acc[3][j]);
          }
        }
        for (int r = 0; r < MR; ++r)
          for (int j = 0; j < TJ; ++j) C[size_t(i0 + r) * N + j0 + j] = acc[r][j];
      } else {
        for (int r = 0; r < iw; ++r) {
          const T* Ai = A + size_t(i0 + r) * K;
          T* Ci = C + size_t(i0 + r) * N;
          T acc[TJ];
          for (int j = 0; j < jw; ++j) acc[j] = accumulate ? Ci[j0 + j] : T(0);
          for (int k = 0; k < K; ++k) {
            T aik = Ai[k];
            const T* Bk = B + size_t(k) * N + j0;
            for (int j = 0; j < jw; ++j) acc[j] = std::fma(aik, Bk[j], acc[j]);
          }
          for (int j = 0; j < jw; ++j) Ci[j0 + j] = acc[j];
        }
      }
    }
  }
}

// C (KxN) = A^T (KxM) @ B (MxN) for A stored MxK; ascending-m fma reduction
// per element (same guarantees as gemm_nn with the roles of k and m swapped).
template <class T>
void gemm_tn(const T* A, int M, int K, const T* B, int N, T* C, bool accumulate) {
  constexpr int MR = 4, TJ = 16;
  for (int k0 = 0; k0 < K; k0 += MR) {
    int kw = K - k0 < MR ? K - k0 : MR;
    for (int j0 = 0; j0 < N; j0 += TJ) {
      int jw = N - j0 < TJ ? N - j0 : TJ;
      if (kw == MR && jw == TJ) {
        T acc[MR][TJ];
        for (int r = 0; r < MR; ++r)
          for (int j = 0; j < TJ; ++j)
            acc[r][j] = accumulate ? C[size_t(k0 + r) * N + j0 + j] : T(0);
        for (int m = 0; m < M; ++m) {
          const T* Am = A + size_t(m) * K + k0;
          const T* Bm = B + size_t(m) * N + j0;
          T a0 = Am[0], a1 = Am[1], a2 = Am[2], a3 = Am[3];
          for (int j = 0; j < TJ; ++j) {
            T b = Bm[j];
            acc[0][j] = std::fma(a0, b, acc[0][j]);
            acc[1][j] = std::fma(a1, b, acc[1][j]);
            acc[2][j] = std::fma(a2, b, acc[2][j]);
            acc[3][j] = std::fma(a3, b, acc[3][j]);
          }
        }
        for (int r = 0; r < MR; ++r)
          for (int j = 0; j < TJ; ++j) C[size_t(k0 + r) * N + j0 + j] = acc[r][j];
      } else {
        for (int r = 0; r < kw; ++r) {
          T* Ck = C + size_t(k0 + r) * N;
          T acc[TJ];
          for (int j = 0; j < jw; ++j) acc[j] = accumulate ? Ck[j0 + j] : T(0);
          for (int m = 0; m < M; ++m) {
            T amk = A[size_t(m) * K + k0 + r];
            const T* Bm = B + size_t(m) * N + j0;
            for (int j = 0; j < jw; ++j) acc[j] = std::fma(amk, Bm[j], acc[j]);
          }
          for (int j = 0; j < jw; ++j) Ck[j0 + j] = acc[j];
        }
      }
    }
  }
}

Matrix matmul(const Matrix& A, const Matrix& B);
Matrix transpose(const Matrix& A);
std::vector<double> matvec(const Matrix& A, const std::vector<double>& x);

// Gauss-Jordan with partial pivoting; throws on (near-)singular input.
Matrix inverse(const Matrix& A);

double frobenius_sq(const Matrix& A);

// Broadcast row add: Y[i,:] += b.
void add_row(Matrix& Y, const std::vector<double>& b);

}  // namespace dnk
