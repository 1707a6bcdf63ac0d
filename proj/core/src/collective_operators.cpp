#include "cising/collective_operators.hpp"

#include <cmath>
#include <string>

#include "cising/error.hpp"

namespace cising {

DickeBasis::DickeBasis(int N) : n_(N) {
  if (N < 1) throw InvalidArgument("DickeBasis: N must be >= 1 (got " + std::to_string(N) + ")");
}

std::vector<double> DickeBasis::m_values() const {
  std::vector<double> out(static_cast<std::size_t>(dim()));
  for (int k = 0; k < dim(); ++k) out[static_cast<std::size_t>(k)] = m(k);
  return out;
}

bool DenseComplexOperator::is_hermitian(double tol) const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

DickeBasis build_basis(int N) { return DickeBasis(N); }

LadderOperators op_ladder(const DickeBasis& basis) {
  const int d = basis.dim();
  const double j = basis.j();
  ComplexMatrix minus = ComplexMatrix::Zero(d, d);
  // J- takes index k (m) to k+1 (m-1).
  for (int k = 0; k + 1 < d; ++k) {
    const double m = basis.m(k);
    minus(k + 1, k) = std::sqrt(j * (j + 1.0) - m * (m - 1.0));
  }
  ComplexMatrix plus = minus.adjoint();
  return {DenseComplexOperator{basis, std::move(minus)}, DenseComplexOperator{basis, std::move(plus)}};
}

CartesianOperators op_cartesian(const DickeBasis& basis) {
  const auto ladder = op_ladder(basis);
  const Complex half_over_i(0.0, -0.5);
  ComplexMatrix x = 0.5 * (ladder.plus.matrix + ladder.minus.matrix);
  ComplexMatrix y = half_over_i * (ladder.plus.matrix - ladder.minus.matrix);
  ComplexMatrix z = ComplexMatrix::Zero(basis.dim(), basis.dim());
  for (int k = 0; k < basis.dim(); ++k) z(k, k) = basis.m(k);
  return {DenseComplexOperator{basis, std::move(x)}, DenseComplexOperator{basis, std::move(y)},
          DenseComplexOperator{basis, std::move(z)}};
}

DenseComplexOperator op_casimir(const DickeBasis& basis) {
  const double j = basis.j();
  return {basis, ComplexMatrix::Identity(basis.dim(), basis.dim()) * Complex(j * (j + 1.0))};
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

}  // namespace cising
