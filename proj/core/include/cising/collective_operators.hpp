#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

namespace cising {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// The maximal-spin (j = N/2) Dicke manifold of N spin-1/2 particles.
///
/// States are ordered with m descending, index k <-> m = j - k, so that Jz
/// is diagonal with decreasing entries and J- maps index k to k+1.
class DickeBasis {
 public:
  /// Throws InvalidArgument for N < 1.
  explicit DickeBasis(int N);

  int spins() const noexcept { return n_; }
  int two_j() const noexcept { return n_; }
  double j() const noexcept { return 0.5 * n_; }
  int dim() const noexcept { return n_ + 1; }
  /// m value of basis index k.
  double m(int k) const noexcept { return 0.5 * (n_ - 2 * k); }
  std::vector<double> m_values() const;

  bool operator==(const DickeBasis&) const = default;

 private:
  int n_;
};

/// A dense matrix acting on the Dicke manifold.
struct DenseComplexOperator {
  DickeBasis basis;
  ComplexMatrix matrix;

  int dim() const noexcept { return basis.dim(); }
  bool is_hermitian(double tol) const;
};

struct LadderOperators {
  DenseComplexOperator minus;
  DenseComplexOperator plus;
};

struct CartesianOperators {
  DenseComplexOperator x;
  DenseComplexOperator y;
  DenseComplexOperator z;
};

DickeBasis build_basis(int N);

/// J-|j,m> = sqrt(j(j+1) - m(m-1)) |j,m-1>; J+ is its conjugate transpose.
LadderOperators op_ladder(const DickeBasis& basis);

/// Jx = (J+ + J-)/2, Jy = (J+ - J-)/(2i), Jz = diag(m).
CartesianOperators op_cartesian(const DickeBasis& basis);

/// J^2 = j(j+1) * Identity on the manifold.
DenseComplexOperator op_casimir(const DickeBasis& basis);

/// Operator commutator AB - BA.
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace cising
