#include "cising/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <complex>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "cising/error.hpp"

namespace cising::eig {

namespace {

Eigen::VectorXcd start_vector(Eigen::Index n) {
  std::mt19937_64 rng(0xa5a5a5a5ULL);
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double im = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v[i] = Complex(1.0 + re, 0.5 * im);
  }
  return v.normalized();
}

std::vector<int> order_by(const std::vector<double>& key) {
  std::vector<int> idx(key.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return key[static_cast<std::size_t>(a)] < key[static_cast<std::size_t>(b)]; });
  return idx;
}

}  // namespace

EigenPairs dense_eigen(const Eigen::MatrixXcd& a, bool compute_vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (a.cols() != a.rows()) throw InvalidArgument("dense_eigen: matrix must be square");
  EigenPairs out;
  if (n == 0) return out;
  Eigen::MatrixXcd work = a;
  Eigen::VectorXcd w(n);
  Eigen::MatrixXcd vr(compute_vectors ? n : 1, compute_vectors ? n : 1);
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', compute_vectors ? 'V' : 'N', n, work.data(), n,
                                        w.data(), nullptr, 1, vr.data(), compute_vectors ? n : 1);
  if (info != 0)
    throw ConvergenceError("dense_eigen: zgeev failed with info=" + std::to_string(info), NAN);
  out.values.assign(w.data(), w.data() + n);
  if (compute_vectors) {
    out.vectors = std::move(vr);
    out.residuals.resize(out.values.size());
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      const auto col = out.vectors.col(static_cast<Eigen::Index>(i));
      out.residuals[i] = (a * col - out.values[i] * col).norm() / col.norm();
    }
  }
  return out;
}

EigenPairs shift_invert_arnoldi(const SparseMatrix& a, Complex shift, const ShiftInvertOptions& opt) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw InvalidArgument("shift_invert_arnoldi: matrix must be square");
  const int k = opt.n_eigenvalues;
  if (k < 1 || k >= n) throw InvalidArgument("shift_invert_arnoldi: need 1 <= n_eigenvalues < dim");
  int m = opt.krylov_dim > 0 ? opt.krylov_dim : std::max(2 * k + 20, 80);
  m = static_cast<int>(std::min<Eigen::Index>(m, n));
  if (m <= k) throw InvalidArgument("shift_invert_arnoldi: Krylov dimension must exceed n_eigenvalues");

  SparseMatrix shifted = a;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift;
  shifted.makeCompressed();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(shifted);
  lu.factorize(shifted);
  if (lu.info() != Eigen::Success)
    throw ConvergenceError("shift_invert_arnoldi: factorization of (A - shift I) failed: " + lu.lastErrorMessage(), NAN);

  Eigen::MatrixXcd basis(n, m + 1);
  Eigen::MatrixXcd hess(m + 1, m);
  Eigen::VectorXcd v0 = start_vector(n);

  EigenPairs out;
  double worst = 0.0;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    basis.setZero();
    hess.setZero();
    basis.col(0) = v0;
    int steps = m;
    bool invariant = false;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXcd w = lu.solve(basis.col(j));
      // Classical Gram-Schmidt with one reorthogonalization pass.
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXcd h = basis.leftCols(j + 1).adjoint() * w;
        w.noalias() -= basis.leftCols(j + 1) * h;
        hess.col(j).head(j + 1) += h;
      }
      const double beta = w.norm();
      hess(j + 1, j) = beta;
      if (beta <= 1e-14 * hess.col(j).head(j + 1).norm()) {
        steps = j + 1;
        invariant = true;
        break;
      }
      basis.col(j + 1) = w / beta;
    }

    const Eigen::MatrixXcd h_square = hess.topLeftCorner(steps, steps);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h_square, true);
    if (es.info() != Eigen::Success) throw ConvergenceError("shift_invert_arnoldi: Ritz problem failed", NAN);

    std::vector<double> key(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) key[static_cast<std::size_t>(i)] = -std::abs(es.eigenvalues()[i]);
    const auto idx = order_by(key);
    const int wanted = std::min(k, steps);

    const double beta_last = invariant ? 0.0 : std::abs(hess(steps, steps - 1));
    worst = 0.0;
    for (int i = 0; i < wanted; ++i) {
      const int c = idx[static_cast<std::size_t>(i)];
      const Eigen::VectorXcd y = es.eigenvectors().col(c).normalized();
      const double theta_abs = std::abs(es.eigenvalues()[c]);
      worst = std::max(worst, beta_last * std::abs(y[steps - 1]) / theta_abs);
    }

    if (worst <= opt.tolerance || restart == opt.max_restarts) {
      if (worst > opt.tolerance)
        throw ConvergenceError("shift_invert_arnoldi: no convergence after " + std::to_string(restart) +
                                   " restarts (worst relative Ritz residual " + std::to_string(worst) + ")",
                               worst);
      out.restarts = restart;
      out.values.resize(static_cast<std::size_t>(wanted));
      if (opt.compute_vectors) {
        out.vectors.resize(n, wanted);
        out.residuals.resize(static_cast<std::size_t>(wanted));
      }
      for (int i = 0; i < wanted; ++i) {
        const int c = idx[static_cast<std::size_t>(i)];
        const Complex lambda = shift + 1.0 / es.eigenvalues()[c];
        out.values[static_cast<std::size_t>(i)] = lambda;
        if (opt.compute_vectors) {
          Eigen::VectorXcd x = basis.leftCols(steps) * es.eigenvectors().col(c);
          x.normalize();
          out.residuals[static_cast<std::size_t>(i)] = (a * x - lambda * x).norm();
          out.vectors.col(i) = x;
        }
      }
      return out;
    }

    // Explicit restart from the sum of the wanted Ritz vectors.
    v0.setZero();
    for (int i = 0; i < wanted; ++i)
      v0 += basis.leftCols(steps) * es.eigenvectors().col(idx[static_cast<std::size_t>(i)]).normalized();
    v0.normalize();
  }
  throw ConvergenceError("shift_invert_arnoldi: unreachable", worst);
}

}  // namespace cising::eig
