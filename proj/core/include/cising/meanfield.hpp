#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cising/model.hpp"

namespace cising::mf {

/// Tolerances shared by the fixed-point machinery.
inline constexpr double kRootTolerance = 1e-10;
inline constexpr double kStabilityTolerance = 1e-9;
inline constexpr double kDedupDistance = 1e-6;
inline constexpr double kSphereTolerance = 1e-8;

enum class Stability { kStable, kMarginal, kUnstable };

struct FixedPoint {
  BlochVector state;
  std::array<std::complex<double>, 3> jacobian_eigenvalues{};
  Stability stability = Stability::kUnstable;
  double residual = 0.0;

  bool stable() const noexcept { return stability == Stability::kStable; }
  double max_real_part() const;
};

/// Mean-field Bloch equations for the normalized magnetization.
Eigen::Vector3d bloch_rhs(const BlochVector& s, const ModelParams& params);

/// Analytic Jacobian M_ab = d f_a / d b of bloch_rhs.
Eigen::Matrix3d jacobian(const BlochVector& s, const ModelParams& params);

/// Closed-form stable steady state at p = 1; empty where 64 g^2 > 16 V^2 + Gamma^2.
std::optional<BlochVector> analytic_p1(const ModelParams& params);

/// One closed-form p = 0 candidate. `xi_sign` and `eta_sign` are +1/-1 for
/// the FM branches; PM poles carry xi_sign = eta_sign = 0.
struct BranchCandidate {
  BlochVector state;
  int xi_sign = 0;
  int eta_sign = 0;
  std::string label() const;
};

/// Roots of Gamma^2 xi^2 - 4 V xi + 1 = 0, ordered (xi_+, xi_-). Empty when 4V^2 < Gamma^2.
std::optional<std::array<double, 2>> xi_roots(double V, double Gamma);

/// All closed-form p = 0 steady-state candidates (FM branches plus both poles).
std::vector<BranchCandidate> analytic_p0(const ModelParams& params);

/// Classifies a root of bloch_rhs. Throws NotAFixedPoint when the residual
/// exceeds kRootTolerance.
FixedPoint classify_stability(const BlochVector& state, const ModelParams& params);

struct SearchOptions {
  int n_seeds = 200;
  std::uint64_t rng_seed = 0x5eed;
  int max_newton_iterations = 100;
};

/// Seed points for the multi-start search: a Fibonacci lattice on the unit
/// sphere, randomly rotated by rng_seed.
std::vector<BlochVector> sphere_seeds(int n_seeds, std::uint64_t rng_seed);

/// Damped Newton from one seed; returns the converged root (residual below
/// kRootTolerance and on the unit sphere) or nothing.
std::optional<BlochVector> newton_root(const BlochVector& seed, const ModelParams& params,
                                       int max_iterations = 100);

/// Multi-start fixed-point search on the unit sphere. Roots are deduplicated
/// and returned in seed order, each classified by classify_stability.
std::vector<FixedPoint> find_fixed_points(const ModelParams& params, const SearchOptions& opt = {});

std::vector<FixedPoint> stable_only(const std::vector<FixedPoint>& points);

}  // namespace cising::mf
