#include "cising/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cising/error.hpp"
#include "cising/meanfield.hpp"

namespace cising::mf {

namespace {

ode::Options ode_options(const TrajectoryOptions& opt) {
  if (!(opt.rel_tol > 0.0 && opt.rel_tol <= 1e-3) || !(opt.abs_tol > 0.0 && opt.abs_tol <= 1e-3))
    throw InvalidArgument("trajectory tolerances must lie in (0, 1e-3]");
  ode::Options o;
  o.rel_tol = opt.rel_tol;
  o.abs_tol = opt.abs_tol;
  return o;
}

auto rhs_for(const ModelParams& params) {
  return [params](double, const Eigen::Vector3d& y, Eigen::Vector3d& dy) {
    dy = bloch_rhs(BlochVector::from(y), params);
  };
}

double residual_at(const BlochVector& s, const ModelParams& params) {
  return bloch_rhs(s, params).cwiseAbs().maxCoeff();
}

int count_differences(const ModelParams& a, const ModelParams& b) {
  return (a.V != b.V) + (a.g != b.g) + (a.p != b.p) + (a.Gamma != b.Gamma);
}

}  // namespace

Trajectory integrate_trajectory(const BlochVector& initial, const ModelParams& params, double t_end,
                                const TrajectoryOptions& opt) {
  params.validate();
  if (!(t_end > 0.0)) throw InvalidArgument("integrate_trajectory: t_end must be > 0");
  const auto o = ode_options(opt);

  Trajectory traj;
  traj.params = params;
  double last_stored = -std::numeric_limits<double>::infinity();
  auto observer = [&](double t, const Eigen::Vector3d& y) {
    if (t - last_stored >= opt.sample_interval || t == t_end) {
      traj.times.push_back(t);
      traj.states.push_back(BlochVector::from(y));
      last_stored = t;
    }
    return true;
  };
  // The last accepted step lands exactly on t_end, so the final state is always stored.
  ode::integrate(rhs_for(params), initial.vec(), 0.0, t_end, o, observer);
  return traj;
}

std::optional<LimitCycle> detect_limit_cycle(const Trajectory& traj, double transient_fraction) {
  if (!(transient_fraction >= 0.0 && transient_fraction < 1.0))
    throw InvalidArgument("detect_limit_cycle: transient_fraction must lie in [0, 1)");
  if (traj.size() < 3) throw InsufficientData("detect_limit_cycle: trajectory has fewer than 3 samples");

  const double t0 = traj.times.front(), t1 = traj.times.back();
  const double t_start = t0 + transient_fraction * (t1 - t0);
  const auto first = std::lower_bound(traj.times.begin(), traj.times.end(), t_start);
  const std::size_t begin = static_cast<std::size_t>(first - traj.times.begin());
  // Include the sample preceding the window so a sparse, settled trajectory still has a span to measure.
  const std::size_t from = begin > 0 ? begin - 1 : 0;
  double variation = 0.0, zmin = traj.states[from].Z, zmax = zmin;
  for (std::size_t i = from + 1; i < traj.size(); ++i) {
    variation += std::abs(traj.states[i].Z - traj.states[i - 1].Z);
    zmin = std::min(zmin, traj.states[i].Z);
    zmax = std::max(zmax, traj.states[i].Z);
  }
  if (variation < 1e-6) return std::nullopt;
  if (traj.size() - begin < 3) throw InsufficientData("detect_limit_cycle: analysis window too short");

  // Local maxima of Z, refined by a parabola through the neighbouring samples.
  std::vector<double> peak_times, peak_values;
  for (std::size_t i = begin + 1; i + 1 < traj.size(); ++i) {
    const double za = traj.states[i - 1].Z, zb = traj.states[i].Z, zc = traj.states[i + 1].Z;
    if (!(zb > za && zb >= zc)) continue;
    const double ta = traj.times[i - 1], tb = traj.times[i], tc = traj.times[i + 1];
    const double d1 = (zb - za) / (tb - ta), d2 = (zc - zb) / (tc - tb);
    const double curv = (d2 - d1) / (tc - ta);
    double tp = tb, zp = zb;
    if (curv < 0.0) {
      // Vertex of the interpolating parabola.
      tp = 0.5 * (ta + tb) - d1 / (2.0 * curv);
      tp = std::clamp(tp, ta, tc);
      zp = zb + d1 * (tp - tb) + curv * (tp - ta) * (tp - tb);
    }
    peak_times.push_back(tp);
    peak_values.push_back(zp);
  }
  if (peak_times.size() < 6)
    throw InsufficientData("detect_limit_cycle: fewer than five oscillations in the analysis window");

  std::vector<double> spacing(peak_times.size() - 1);
  for (std::size_t i = 0; i + 1 < peak_times.size(); ++i) spacing[i] = peak_times[i + 1] - peak_times[i];
  const double mean = std::accumulate(spacing.begin(), spacing.end(), 0.0) / static_cast<double>(spacing.size());
  double var = 0.0;
  for (double s : spacing) var += (s - mean) * (s - mean);
  const double cv = std::sqrt(var / static_cast<double>(spacing.size())) / mean;

  const double amplitude = zmax - zmin;
  const auto [pmin, pmax] = std::minmax_element(peak_values.begin(), peak_values.end());
  const double peak_spread = (*pmax - *pmin) / amplitude;

  if (cv < 0.01 && peak_spread < 0.01) return LimitCycle{mean, amplitude};
  return std::nullopt;
}

SettleResult settle(const BlochVector& initial, const ModelParams& params, double t_max, double tol,
                    const TrajectoryOptions& opt) {
  params.validate();
  if (!(t_max > 0.0)) throw InvalidArgument("settle: t_max must be > 0");
  SettleResult res;
  res.state = initial;
  res.residual = residual_at(initial, params);
  if (res.residual < tol) {
    res.converged = true;
    return res;
  }
  auto observer = [&](double t, const Eigen::Vector3d& y) {
    res.time = t;
    res.state = BlochVector::from(y);
    res.residual = residual_at(res.state, params);
    return !(res.residual < tol);
  };
  ode::integrate(rhs_for(params), initial.vec(), 0.0, t_max, ode_options(opt), observer);
  res.converged = res.residual < tol;
  return res;
}

std::vector<ContinuationPoint> continuation_sweep_mf(const std::vector<ModelParams>& path,
                                                     const BlochVector& initial, double settle_time,
                                                     const TrajectoryOptions& opt) {
  if (path.empty()) throw InvalidArgument("continuation_sweep_mf: empty parameter path");
  if (!(settle_time > 0.0)) throw InvalidArgument("continuation_sweep_mf: settle_time must be > 0");
  for (std::size_t i = 0; i < path.size(); ++i) {
    path[i].validate();
    if (i > 0 && count_differences(path[i - 1], path[i]) > 1)
      throw InvalidArgument("continuation_sweep_mf: consecutive points must differ in exactly one parameter");
  }
  const auto o = ode_options(opt);

  std::vector<ContinuationPoint> out;
  out.reserve(path.size());
  Eigen::Vector3d y = initial.vec();
  for (const auto& params : path) {
    y = ode::integrate(rhs_for(params), y, 0.0, settle_time, o);
    ContinuationPoint pt;
    pt.params = params;
    pt.state = BlochVector::from(y);
    pt.residual = residual_at(pt.state, params);
    pt.converged = pt.residual < kContinuationConvergence;
    out.push_back(pt);
  }
  return out;
}

}  // namespace cising::mf
