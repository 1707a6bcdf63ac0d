#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "cising/eigensolver.hpp"
#include "cising/error.hpp"
#include "support/generators.hpp"

using namespace cising;
using cising::eig::SparseMatrix;
using cising::testing::Gen;

namespace {

// Banded non-normal test matrix with a known-by-dense spectrum.
SparseMatrix banded(Gen& gen, int n, int band) {
  std::vector<Eigen::Triplet<Complex>> t;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - band); j <= std::min(n - 1, i + band); ++j) {
      Complex v(gen.normal(), gen.normal());
      if (i == j) v += Complex(-0.05 * i - 1.0, 0.0);
      t.emplace_back(i, j, v * (i == j ? 1.0 : 0.3));
    }
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

std::vector<Complex> nearest(std::vector<Complex> all, Complex shift, int k) {
  std::sort(all.begin(), all.end(), [&](Complex a, Complex b) { return std::abs(a - shift) < std::abs(b - shift); });
  all.resize(static_cast<std::size_t>(k));
  return all;
}

}  // namespace

TEST_CASE("diagonal matrix") {
  const int n = 50;
  SparseMatrix a(n, n);
  for (int i = 0; i < n; ++i) a.insert(i, i) = Complex(-i, 0.5 * i);
  eig::ShiftInvertOptions opt;
  opt.n_eigenvalues = 4;
  const auto r = eig::shift_invert_arnoldi(a, Complex(0.3, 0.0), opt);
  REQUIRE(r.values.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(r.values[k] - Complex(-k, 0.5 * k)) < 1e-10);
}

TEST_CASE("shift-invert agrees with the dense solver") {
  Gen gen(4242);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = gen.integer(60, 300);
    const auto a = banded(gen, n, 3);
    const Complex shift(gen.uniform(-2, 0), gen.uniform(-1, 1));
    eig::ShiftInvertOptions opt;
    opt.n_eigenvalues = 6;
    const auto r = eig::shift_invert_arnoldi(a, shift, opt);
    const auto dense = eig::dense_eigen(Eigen::MatrixXcd(a), false);
    const auto want = nearest(dense.values, shift, 6);
    CAPTURE(n);
    REQUIRE(r.values.size() == 6);
    for (int k = 0; k < 6; ++k) {
      CHECK(std::abs(r.values[k] - want[k]) < 1e-8 * std::max(1.0, std::abs(want[k])));
      CHECK(r.residuals[k] < 1e-8);
    }
  }
}

TEST_CASE("dense eigenpairs satisfy A v = lambda v") {
  Gen gen(1);
  const auto a = gen.complex_matrix(40);
  const auto r = eig::dense_eigen(a, true);
  REQUIRE(r.values.size() == 40);
  for (double res : r.residuals) CHECK(res < 1e-12 * a.norm());
}

TEST_CASE("argument checks") {
  SparseMatrix a(5, 5);
  for (int i = 0; i < 5; ++i) a.insert(i, i) = Complex(i + 1.0, 0.0);
  eig::ShiftInvertOptions opt;
  opt.n_eigenvalues = 5;
  CHECK_THROWS_AS(eig::shift_invert_arnoldi(a, Complex(0.0, 0.0), opt), InvalidArgument);
  SparseMatrix rect(4, 5);
  CHECK_THROWS_AS(eig::shift_invert_arnoldi(rect, Complex(0.0, 0.0)), InvalidArgument);
}

TEST_CASE("non-convergence reports the worst residual") {
  Gen gen(6);
  const auto a = banded(gen, 400, 4);
  eig::ShiftInvertOptions opt;
  opt.n_eigenvalues = 30;
  opt.krylov_dim = 32;
  opt.max_restarts = 0;
  opt.tolerance = 1e-15;
  try {
    eig::shift_invert_arnoldi(a, Complex(-5.0, 0.0), opt);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 0.0);
  }
}
