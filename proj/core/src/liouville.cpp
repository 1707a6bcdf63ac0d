#include "cising/liouville.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "cising/eigensolver.hpp"
#include "cising/error.hpp"
#include "cising/ode.hpp"

namespace cising {

namespace {

using Triplet = Eigen::Triplet<Complex>;
const Complex kI(0.0, 1.0);

void check_basis(const ModelParams& params, const DickeBasis& basis) {
  params.validate_quantum();
  if (basis.spins() != params.N)
    throw InvalidArgument("basis has N=" + std::to_string(basis.spins()) + " but params have N=" +
                          std::to_string(params.N));
}

// Appends scale * (A kron B) to the triplet list, skipping zero entries.
void add_kron(std::vector<Triplet>& out, const ComplexMatrix& a, const ComplexMatrix& b, Complex scale) {
  const Eigen::Index d = b.rows();
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const Complex aij = a(i, j);
      if (aij == Complex(0.0)) continue;
      for (Eigen::Index l = 0; l < b.cols(); ++l)
        for (Eigen::Index k = 0; k < b.rows(); ++k) {
          const Complex bkl = b(k, l);
          if (bkl == Complex(0.0)) continue;
          out.emplace_back(static_cast<int>(i * d + k), static_cast<int>(j * d + l), scale * aij * bkl);
        }
    }
}

ComplexMatrix identity(int d) { return ComplexMatrix::Identity(d, d); }

}  // namespace

DenseComplexOperator build_hamiltonian(const ModelParams& params, const DickeBasis& basis) {
  check_basis(params, basis);
  const auto J = op_cartesian(basis);
  const double coupling = params.V / (2.0 * params.N);
  const ComplexMatrix h0 = coupling * J.x.matrix * J.x.matrix + params.g * J.z.matrix;
  const ComplexMatrix h1 = coupling * J.z.matrix * J.z.matrix + params.g * J.x.matrix;
  return {basis, (1.0 - params.p) * h0 + params.p * h1};
}

DensityMatrix DensityMatrix::pure(const DickeBasis& basis, int index) {
  if (index < 0 || index >= basis.dim()) throw InvalidArgument("DensityMatrix::pure: index out of range");
  ComplexMatrix m = ComplexMatrix::Zero(basis.dim(), basis.dim());
  m(index, index) = 1.0;
  return {basis, std::move(m)};
}

DensityMatrix DensityMatrix::maximally_mixed(const DickeBasis& basis) {
  return {basis, identity(basis.dim()) / static_cast<double>(basis.dim())};
}

double DensityMatrix::hermiticity_error() const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrix::min_eigenvalue() const {
  const ComplexMatrix herm = 0.5 * (matrix + matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::VectorXcd vectorize(const ComplexMatrix& m) {
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

ComplexMatrix unvectorize(const Eigen::VectorXcd& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim) throw InvalidArgument("unvectorize: size mismatch");
  return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

double LiouvillianMatrix::max_abs_entry() const {
  double m = 0.0;
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(matrix, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

ComplexMatrix LiouvillianMatrix::apply(const ComplexMatrix& rho) const {
  return unvectorize(matrix * vectorize(rho), basis.dim());
}

LiouvillianMatrix build_liouvillian(const ModelParams& params, const DickeBasis& basis) {
  check_basis(params, basis);
  if (params.N > kMaxLiouvillianSpins)
    throw InvalidArgument("build_liouvillian: N=" + std::to_string(params.N) + " exceeds the supported maximum " +
                          std::to_string(kMaxLiouvillianSpins));
  const int d = basis.dim();
  const ComplexMatrix h = build_hamiltonian(params, basis).matrix;
  const auto ladder = op_ladder(basis);
  const ComplexMatrix& jm = ladder.minus.matrix;
  const ComplexMatrix jpjm = ladder.plus.matrix * jm;
  const ComplexMatrix id = identity(d);
  const double rate = params.Gamma / (2.0 * params.N);

  // With column stacking, vec(A rho B) = (B^T kron A) vec(rho).
  std::vector<Triplet> t;
  add_kron(t, id, h, -kI);                                    // -i H rho
  add_kron(t, h.transpose(), id, kI);                         // +i rho H
  add_kron(t, jm.conjugate(), jm, 2.0 * rate);                // 2 J- rho J+
  add_kron(t, id, jpjm, -rate);                               // -J+J- rho
  add_kron(t, jpjm.transpose(), id, -rate);                   // -rho J+J-

  LiouvillianMatrix L{params, basis, Eigen::SparseMatrix<Complex>(d * d, d * d)};
  L.matrix.setFromTriplets(t.begin(), t.end());
  L.matrix.prune(Complex(0.0), 0.0);
  L.matrix.makeCompressed();
  return L;
}

DirectLindblad::DirectLindblad(const ModelParams& params, const DickeBasis& basis)
    : basis_(basis), rate_(0.0) {
  check_basis(params, basis);
  h_ = build_hamiltonian(params, basis).matrix;
  auto ladder = op_ladder(basis);
  jm_ = std::move(ladder.minus.matrix);
  jp_ = std::move(ladder.plus.matrix);
  jpjm_ = jp_ * jm_;
  rate_ = params.Gamma / (2.0 * params.N);
}

void DirectLindblad::apply(const ComplexMatrix& rho, ComplexMatrix& out) const {
  const ComplexMatrix anti = jpjm_ * rho + rho * jpjm_;
  out = -kI * (h_ * rho - rho * h_) + rate_ * (2.0 * jm_ * rho * jp_ - anti);
}

ComplexMatrix DirectLindblad::operator()(const ComplexMatrix& rho) const {
  ComplexMatrix out;
  apply(rho, out);
  return out;
}

namespace {

double zero_tolerance_for(const LiouvillianMatrix& L, double requested) {
  return requested > 0.0 ? requested : 1e-10 * L.max_abs_entry();
}

// A shift on the stable side of the spectrum keeps (L - shift) invertible
// while the steady state stays the closest eigenvalue.
Complex default_shift(const LiouvillianMatrix& L) { return Complex(1e-6 * std::max(1.0, L.max_abs_entry()), 0.0); }

}  // namespace

namespace {

SpectralResult summarize(std::vector<Complex> values, const LiouvillianMatrix& L, const SpectralOptions& opt,
                         SpectralMethod used) {
  SpectralResult res;
  res.method_used = used;
  res.zero_tolerance = zero_tolerance_for(L, opt.zero_tolerance);
  res.eigenvalues = std::move(values);
  std::sort(res.eigenvalues.begin(), res.eigenvalues.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });

  std::size_t smallest = 0;
  for (std::size_t i = 0; i < res.eigenvalues.size(); ++i) {
    if (std::abs(res.eigenvalues[i]) < res.zero_tolerance) ++res.zero_multiplicity;
    if (std::abs(res.eigenvalues[i]) < std::abs(res.eigenvalues[smallest])) smallest = i;
  }
  // The smallest-modulus eigenvalue always stands for the steady state.
  for (std::size_t i = 0; i < res.eigenvalues.size(); ++i) {
    const Complex lam = res.eigenvalues[i];
    if (i == smallest || std::abs(lam) < res.zero_tolerance) continue;
    if (!res.slowest_mode || lam.real() > res.slowest_mode->real()) res.slowest_mode = lam;
  }
  if (res.slowest_mode) {
    res.gap = std::abs(res.slowest_mode->real());
    res.near_degenerate = std::abs(*res.slowest_mode) < 10.0 * res.zero_tolerance;
  }
  return res;
}

SteadyState finish_steady_state(const LiouvillianMatrix& L, const Eigen::VectorXcd& v,
                                const std::vector<Complex>& values) {
  const double tol = zero_tolerance_for(L, 0.0);
  SteadyState out{DensityMatrix{L.basis, unvectorize(v, L.basis.dim())}};
  for (const auto& lam : values)
    if (std::abs(lam) < tol) ++out.zero_multiplicity;
  out.zero_multiplicity = std::max(out.zero_multiplicity, 1);
  out.degenerate = out.zero_multiplicity > 1;

  ComplexMatrix& rho = out.rho.matrix;
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  out.residual = (L.matrix * vectorize(rho)).norm();
  out.positivity_warning = out.rho.min_eigenvalue() < -1e-8;
  return out;
}

SpectralMethod resolve(const LiouvillianMatrix& L, const SpectralOptions& opt) {
  if (opt.method != SpectralMethod::kAuto) return opt.method;
  return L.basis.spins() <= kDenseSpinLimit ? SpectralMethod::kDense : SpectralMethod::kIterative;
}

}  // namespace

SpectralResult liouvillian_gap(const LiouvillianMatrix& L, const SpectralOptions& opt) {
  const SpectralMethod method = resolve(L, opt);
  if (method == SpectralMethod::kDense || L.dim() <= opt.n_eigenvalues + 1)
    return summarize(eig::dense_eigen(L.dense(), false).values, L, opt, SpectralMethod::kDense);
  eig::ShiftInvertOptions so;
  so.n_eigenvalues = opt.n_eigenvalues;
  so.compute_vectors = false;
  return summarize(eig::shift_invert_arnoldi(L.matrix, default_shift(L), so).values, L, opt,
                   SpectralMethod::kIterative);
}

SteadyState steady_state(const LiouvillianMatrix& L) {
  if (L.dim() <= 64) {
    const auto pairs = eig::dense_eigen(L.dense(), true);
    std::size_t best = 0;
    for (std::size_t i = 1; i < pairs.values.size(); ++i)
      if (std::abs(pairs.values[i]) < std::abs(pairs.values[best])) best = i;
    return finish_steady_state(L, pairs.vectors.col(static_cast<Eigen::Index>(best)), pairs.values);
  }
  eig::ShiftInvertOptions so;
  so.n_eigenvalues = std::min(4, L.dim() - 2);
  const auto pairs = eig::shift_invert_arnoldi(L.matrix, default_shift(L), so);
  return finish_steady_state(L, pairs.vectors.col(0), pairs.values);
}

SteadyStateAndGap steady_state_and_gap(const LiouvillianMatrix& L, const SpectralOptions& opt) {
  if (resolve(L, opt) == SpectralMethod::kDense || L.dim() <= 64 || L.dim() <= opt.n_eigenvalues + 1)
    return {steady_state(L), liouvillian_gap(L, opt)};
  eig::ShiftInvertOptions so;
  so.n_eigenvalues = opt.n_eigenvalues;
  const auto pairs = eig::shift_invert_arnoldi(L.matrix, default_shift(L), so);
  // Column 0 belongs to the eigenvalue nearest the shift, which is the zero mode.
  return {finish_steady_state(L, pairs.vectors.col(0), pairs.values),
          summarize(pairs.values, L, opt, SpectralMethod::kIterative)};
}

DensityMatrix evolve_rho(const DensityMatrix& rho0, const ModelParams& params, double t_end, const EvolveOptions& opt) {
  if (!(t_end > 0.0)) throw InvalidArgument("evolve_rho: t_end must be > 0");
  const auto L = build_liouvillian(params, rho0.basis);
  ode::Options o;
  o.rel_tol = opt.rel_tol;
  o.abs_tol = opt.abs_tol;
  auto rhs = [&L](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { dy.noalias() = L.matrix * y; };
  const Eigen::VectorXcd y = ode::integrate(rhs, vectorize(rho0.matrix), 0.0, t_end, o);
  return {rho0.basis, unvectorize(y, rho0.dim())};
}

BlochVector magnetization(const DensityMatrix& rho) {
  const auto J = op_cartesian(rho.basis);
  const double half = 0.5 * rho.basis.spins();
  // tr(A rho) = sum_ij A_ij rho_ji
  auto expect = [&](const ComplexMatrix& a) { return (a.transpose().cwiseProduct(rho.matrix)).sum().real(); };
  return {expect(J.x.matrix) / half, expect(J.y.matrix) / half, expect(J.z.matrix) / half};
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  const ComplexMatrix diff = a - b;
  const ComplexMatrix herm = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

std::vector<RampRecord> ramped_evolution(const DensityMatrix& rho0, const std::vector<RampStep>& schedule,
                                         const EvolveOptions& opt) {
  for (const auto& step : schedule) {
    if (step.params.N != rho0.basis.spins())
      throw InvalidArgument("ramped_evolution: schedule entry has N=" + std::to_string(step.params.N) +
                            " but the state has N=" + std::to_string(rho0.basis.spins()));
    if (!(step.window >= 0.0)) throw InvalidArgument("ramped_evolution: windows must be non-negative");
  }
  std::vector<RampRecord> out;
  out.reserve(schedule.size());
  DensityMatrix rho = rho0;
  for (const auto& step : schedule) {
    if (step.window > 0.0) rho = evolve_rho(rho, step.params, step.window, opt);
    out.push_back({step.params, magnetization(rho)});
  }
  return out;
}

}  // namespace cising
