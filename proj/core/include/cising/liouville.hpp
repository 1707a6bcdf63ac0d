#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "cising/collective_operators.hpp"
#include "cising/model.hpp"

namespace cising {

/// Hamiltonian of the mixed model on the Dicke manifold.
DenseComplexOperator build_hamiltonian(const ModelParams& params, const DickeBasis& basis);

/// Density matrix on the Dicke manifold.
struct DensityMatrix {
  DickeBasis basis;
  ComplexMatrix matrix;

  static DensityMatrix pure(const DickeBasis& basis, int index);
  static DensityMatrix maximally_mixed(const DickeBasis& basis);

  int dim() const noexcept { return basis.dim(); }
  Complex trace() const { return matrix.trace(); }
  double hermiticity_error() const;
  /// Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const;
};

/// Column-stacking vectorization: vec(rho)[i + dim * j] = rho(i, j).
Eigen::VectorXcd vectorize(const ComplexMatrix& m);
ComplexMatrix unvectorize(const Eigen::VectorXcd& v, int dim);

/// The Lindbladian as a matrix acting on column-stacked density matrices:
///   vec(A rho B) = (B^T kron A) vec(rho).
struct LiouvillianMatrix {
  ModelParams params;
  DickeBasis basis;
  Eigen::SparseMatrix<Complex> matrix;
  static constexpr const char* kStacking = "column-major";

  int dim() const noexcept { return static_cast<int>(matrix.rows()); }
  double max_abs_entry() const;
  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(matrix); }
  /// L(rho) through the superoperator matrix.
  ComplexMatrix apply(const ComplexMatrix& rho) const;
};

inline constexpr int kMaxLiouvillianSpins = 200;

/// Throws InvalidArgument on basis/params mismatch or N > kMaxLiouvillianSpins.
LiouvillianMatrix build_liouvillian(const ModelParams& params, const DickeBasis& basis);

/// Right-hand side of the master equation evaluated with plain matrix
/// products: -i[H, rho] + (Gamma/2N)(2 J- rho J+ - {J+ J-, rho}).
class DirectLindblad {
 public:
  DirectLindblad(const ModelParams& params, const DickeBasis& basis);
  ComplexMatrix operator()(const ComplexMatrix& rho) const;
  void apply(const ComplexMatrix& rho, ComplexMatrix& out) const;
  const DickeBasis& basis() const noexcept { return basis_; }

 private:
  DickeBasis basis_;
  ComplexMatrix h_;
  ComplexMatrix jm_;
  ComplexMatrix jp_;
  ComplexMatrix jpjm_;
  double rate_;
};

enum class SpectralMethod { kDense, kIterative, kAuto };

struct SpectralOptions {
  SpectralMethod method = SpectralMethod::kAuto;
  int n_eigenvalues = 8;        // iterative only
  double zero_tolerance = 0.0;  // 0 -> 1e-10 * max |L_ij|
};

/// Largest N handled by the dense path under SpectralMethod::kAuto.
inline constexpr int kDenseSpinLimit = 30;

struct SpectralResult {
  std::vector<Complex> eigenvalues;  // sorted by descending real part
  double gap = 0.0;                  // |Re| of the slowest nonzero mode
  std::optional<Complex> slowest_mode;
  int zero_multiplicity = 0;
  double zero_tolerance = 0.0;
  bool near_degenerate = false;  // second eigenvalue within 10x of the zero tolerance
  SpectralMethod method_used = SpectralMethod::kDense;
};

SpectralResult liouvillian_gap(const LiouvillianMatrix& L, const SpectralOptions& opt = {});

struct SteadyState {
  DensityMatrix rho;
  double residual = 0.0;  // ||L vec(rho)||_2
  int zero_multiplicity = 1;
  bool degenerate = false;
  bool positivity_warning = false;  // min eigenvalue below -1e-8
};

/// Eigenvector of the Liouvillian with the eigenvalue of smallest modulus,
/// Hermitian-symmetrized and trace-normalized.
SteadyState steady_state(const LiouvillianMatrix& L);

struct SteadyStateAndGap {
  SteadyState steady;
  SpectralResult spectrum;
};

/// Both results from one eigensolve where the iterative path allows it.
SteadyStateAndGap steady_state_and_gap(const LiouvillianMatrix& L, const SpectralOptions& opt = {});

struct EvolveOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
};

/// Integrates d rho/dt = L(rho) over [0, t_end].
DensityMatrix evolve_rho(const DensityMatrix& rho0, const ModelParams& params, double t_end,
                         const EvolveOptions& opt = {});

/// (tr(Jx rho), tr(Jy rho), tr(Jz rho)) / (N/2).
BlochVector magnetization(const DensityMatrix& rho);

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

struct RampStep {
  ModelParams params;
  double window = 0.0;
};

struct RampRecord {
  ModelParams params;
  BlochVector magnetization;
};

/// Evolves for each window in turn, carrying rho forward; records the
/// magnetization at the end of every window. A zero window leaves rho unchanged.
std::vector<RampRecord> ramped_evolution(const DensityMatrix& rho0, const std::vector<RampStep>& schedule,
                                         const EvolveOptions& opt = {});

}  // namespace cising
