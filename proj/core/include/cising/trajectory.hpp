#pragma once

#include <optional>
#include <vector>

#include "cising/model.hpp"
#include "cising/ode.hpp"

namespace cising::mf {

struct Trajectory {
  std::vector<double> times;
  std::vector<BlochVector> states;
  ModelParams params;

  std::size_t size() const noexcept { return times.size(); }
  const BlochVector& back() const { return states.back(); }
};

struct TrajectoryOptions {
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  // Minimum spacing between stored samples; 0 stores every accepted step.
  double sample_interval = 0.0;
};

/// Integrates the Bloch equations from `initial` over [0, t_end]. Tolerances
/// must lie in (0, 1e-3].
Trajectory integrate_trajectory(const BlochVector& initial, const ModelParams& params, double t_end,
                                const TrajectoryOptions& opt = {});

struct LimitCycle {
  double period = 0.0;
  double z_amplitude = 0.0;  // peak-to-trough of Z in the analysis window
};

/// Periodicity of Z(t) after discarding `transient_fraction` of the time span.
/// Returns nothing when Z settles. Throws InsufficientData when the window
/// holds fewer than five oscillations and Z has not settled.
std::optional<LimitCycle> detect_limit_cycle(const Trajectory& traj, double transient_fraction = 0.5);

struct ContinuationPoint {
  ModelParams params;
  BlochVector state;
  double residual = 0.0;  // max |RHS| at the recorded state
  bool converged = false;
};

inline constexpr double kContinuationConvergence = 1e-8;

/// Follows a branch along `path`, integrating `settle_time` at every point
/// from the previous final state. Consecutive points must differ in exactly
/// one of V, g, p, Gamma.
std::vector<ContinuationPoint> continuation_sweep_mf(const std::vector<ModelParams>& path,
                                                     const BlochVector& initial, double settle_time,
                                                     const TrajectoryOptions& opt = {});

/// Integrates until max |RHS| < tol or t_max is reached; returns the final state.
struct SettleResult {
  BlochVector state;
  double time = 0.0;
  double residual = 0.0;
  bool converged = false;
};
SettleResult settle(const BlochVector& initial, const ModelParams& params, double t_max, double tol,
                    const TrajectoryOptions& opt = {});

}  // namespace cising::mf
