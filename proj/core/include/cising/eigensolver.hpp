#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace cising::eig {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

struct ShiftInvertOptions {
  int n_eigenvalues = 6;     // number of eigenvalues nearest the shift
  int krylov_dim = 0;        // 0 picks max(2k + 20, 80), capped at the dimension
  int max_restarts = 60;
  double tolerance = 1e-12;  // relative Ritz residual in the inverted spectrum
  bool compute_vectors = true;
};

struct EigenPairs {
  std::vector<Complex> values;
  Eigen::MatrixXcd vectors;       // column i belongs to values[i]; empty if not requested
  std::vector<double> residuals;  // ||A v - lambda v|| for unit v (when vectors are computed)
  int restarts = 0;
};

/// Eigenvalues of a general complex sparse matrix closest to `shift`, via
/// Arnoldi iteration on (A - shift I)^{-1} with explicit restarts. Results are
/// ordered by increasing distance from the shift. Throws ConvergenceError with
/// the worst Ritz residual when the restart budget runs out.
EigenPairs shift_invert_arnoldi(const SparseMatrix& a, Complex shift, const ShiftInvertOptions& opt = {});

/// Full spectrum of a dense complex matrix, with optional eigenvectors.
EigenPairs dense_eigen(const Eigen::MatrixXcd& a, bool compute_vectors);

}  // namespace cising::eig
