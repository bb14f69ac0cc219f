#pragma once
#include <vector>

#include "dnk/matrix.hpp"

namespace dnk {

struct PcaResult {
  Matrix components;               // k x d, orthonormal rows
  std::vector<double> fractions;   // per-component share of total variance
  Matrix projections;              // n x k, centered samples onto components
  std::vector<double> mean;        // d
};

// Eigendecomposition of the (1/n) sample covariance via cyclic Jacobi sweeps.
PcaResult pca_fit(const std::vector<std::vector<double>>& samples, int k);

// Jacobi eigensolver for symmetric matrices: returns (eigenvalues, eigenvectors
// as columns), unsorted. Exposed for tests.
void jacobi_eigen(Matrix S, std::vector<double>& eigvals, Matrix& eigvecs);

}  // namespace dnk
