#include "cising/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "cising/error.hpp"
#include "cising/ode.hpp"

namespace cising::sweep {

Parameter parse_parameter(const std::string& name) {
  if (name == "V") return Parameter::kV;
  if (name == "g") return Parameter::kG;
  if (name == "p") return Parameter::kP;
  throw InvalidArgument("unknown sweep parameter '" + name + "' (expected V, g or p)");
}

std::string to_string(Parameter p) {
  switch (p) {
    case Parameter::kV: return "V";
    case Parameter::kG: return "g";
    case Parameter::kP: return "p";
  }
  return "?";
}

double get(const ModelParams& params, Parameter which) {
  switch (which) {
    case Parameter::kV: return params.V;
    case Parameter::kG: return params.g;
    case Parameter::kP: return params.p;
  }
  return 0.0;
}

void set(ModelParams& params, Parameter which, double value) {
  switch (which) {
    case Parameter::kV: params.V = value; break;
    case Parameter::kG: params.g = value; break;
    case Parameter::kP: params.p = value; break;
  }
}

std::vector<double> Axis::values() const {
  std::vector<double> out(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    // Endpoints exact; interior points by linear interpolation.
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out[static_cast<std::size_t>(i)] = i == count - 1 && count > 1 ? max : min + t * (max - min);
  }
  return out;
}

void GridSpec::validate() const {
  for (const Axis* a : {&axis1, &axis2}) {
    if (a->count < 2) throw InvalidArgument("GridSpec: axis '" + to_string(a->parameter) + "' needs count >= 2");
    if (!(a->min < a->max)) throw InvalidArgument("GridSpec: axis '" + to_string(a->parameter) + "' needs min < max");
  }
  if (axis1.parameter == axis2.parameter) throw InvalidArgument("GridSpec: axis parameters must be distinct");
  fixed.validate();
}

std::vector<ModelParams> GridSpec::points() const {
  validate();
  std::vector<ModelParams> out;
  out.reserve(static_cast<std::size_t>(axis1.count) * static_cast<std::size_t>(axis2.count));
  for (double a : axis1.values())
    for (double b : axis2.values()) {
      ModelParams prm = fixed;
      set(prm, axis1.parameter, a);
      set(prm, axis2.parameter, b);
      prm.validate();
      out.push_back(prm);
    }
  return out;
}

SolverSpec SolverSpec::quantum(int n, bool gap) {
  SolverSpec s;
  s.kind = Kind::kQuantum;
  s.N = n;
  s.compute_gap = gap;
  return s;
}

void SolverSpec::validate() const {
  if (kind == Kind::kQuantum) {
    if (N < 1) throw InvalidArgument("quantum solver needs N >= 1");
    if (N > kMaxQuantumSpins)
      throw InvalidArgument("quantum solver supports N <= " + std::to_string(kMaxQuantumSpins));
  }
  if (search.n_seeds < 1) throw InvalidArgument("solver: n_seeds must be >= 1");
  if (!(settle_time_max > 0.0)) throw InvalidArgument("solver: settle_time_max must be > 0");
  if (!(cycle_time > 0.0)) throw InvalidArgument("solver: cycle_time must be > 0");
}

namespace {

// Tilt off the pole so an unstable pole is actually left.
BlochVector tilted_south_pole() {
  const double eps = 1e-3;
  const Eigen::Vector3d v = Eigen::Vector3d(eps, eps, -1.0).normalized();
  return BlochVector::from(v);
}

const mf::FixedPoint* nearest(const std::vector<mf::FixedPoint>& pts, const BlochVector& s) {
  const mf::FixedPoint* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& fp : pts) {
    const double d = (fp.state.vec() - s.vec()).norm();
    if (d < best_d) {
      best_d = d;
      best = &fp;
    }
  }
  return best;
}

}  // namespace

Selection select_from_south_pole(const ModelParams& params, const std::vector<mf::FixedPoint>& stable,
                                 double t_max) {
  for (const auto& fp : stable)
    if ((fp.state.vec() - kSouthPole.vec()).norm() < mf::kDedupDistance) return {fp.state, true};
  if (stable.empty()) {
    const auto settled = mf::settle(tilted_south_pole(), params, t_max, 1e-9);
    return {settled.state, settled.converged};
  }

  // Integrate in chunks until the orbit enters a small ball around a known stable point.
  // An orbit that locks onto a limit cycle instead falls back to the stable point nearest the pole.
  const mf::FixedPoint* hit = nullptr;
  auto rhs = [&](double, const Eigen::Vector3d& y, Eigen::Vector3d& dy) {
    dy = mf::bloch_rhs(BlochVector::from(y), params);
  };
  ode::Options opt;
  opt.rel_tol = 1e-11;
  opt.abs_tol = 1e-13;
  constexpr double kChunk = 200.0;
  Eigen::Vector3d y = tilted_south_pole().vec();
  bool cycling = false;
  for (double t = 0.0; t < t_max && !hit && !cycling;) {
    const double t1 = std::min(t + kChunk, t_max);
    mf::Trajectory chunk;
    chunk.params = params;
    auto observer = [&](double tt, const Eigen::Vector3d& yy) {
      chunk.times.push_back(tt);
      chunk.states.push_back(BlochVector::from(yy));
      const auto* fp = nearest(stable, chunk.states.back());
      if ((fp->state.vec() - yy).norm() < 1e-6) hit = fp;
      return hit == nullptr;
    };
    y = ode::integrate(rhs, y, t, t1, opt, observer);
    t = t1;
    if (!hit && t < t_max) {
      try {
        cycling = mf::detect_limit_cycle(chunk, 0.0).has_value();
      } catch (const InsufficientData&) {
      }
    }
  }
  if (hit) return {hit->state, true};
  if (const auto* fp = nearest(stable, BlochVector::from(y)); !cycling && (fp->state.vec() - y).norm() < 1e-3)
    return {fp->state, true};
  return {nearest(stable, kSouthPole)->state, false, cycling};
}

PhasePoint evaluate_point(const ModelParams& params, const SolverSpec& solver) {
  PhasePoint pt;
  pt.params = params;
  try {
    solver.validate();
    if (solver.kind == SolverSpec::Kind::kMeanField) {
      const auto all = mf::find_fixed_points(params, solver.search);
      for (const auto& fp : all)
        pt.leading_real_part = std::min(pt.leading_real_part.value_or(fp.max_real_part()), fp.max_real_part());
      pt.stable_points = mf::stable_only(all);
      pt.stable_count = static_cast<int>(pt.stable_points.size());
      if (pt.stable_count > 0) {
        const auto sel = select_from_south_pole(params, pt.stable_points, solver.settle_time_max);
        pt.selected = sel.state;
        pt.selected_converged = sel.converged;
        pt.limit_cycle = sel.limit_cycle;
      } else {
        const auto traj = mf::integrate_trajectory(tilted_south_pole(), params, solver.cycle_time);
        try {
          pt.limit_cycle = mf::detect_limit_cycle(traj, 0.5).has_value();
        } catch (const InsufficientData&) {
          pt.limit_cycle = false;
        }
        pt.selected = traj.states.back();
        pt.selected_converged = false;
      }
    } else {
      ModelParams qp = params;
      qp.N = solver.N;
      const DickeBasis basis(solver.N);
      const auto L = build_liouvillian(qp, basis);
      SpectralOptions so;
      so.method = solver.gap_method;
      std::optional<SteadyStateAndGap> both;
      if (solver.compute_gap) both = steady_state_and_gap(L, so);
      const auto ss = both ? both->steady : steady_state(L);
      pt.params = qp;
      pt.selected = magnetization(ss.rho);
      pt.selected_converged = ss.residual < 1e-8;
      if (both) pt.gap = both->spectrum.gap;
    }
    pt.selected_Z = std::clamp(pt.selected.Z, -1.0, 1.0);
  } catch (const std::exception& e) {
    pt.error = e.what();
  }
  return pt;
}

std::vector<PhasePoint> evaluate_points(const std::vector<ModelParams>& points, const SolverSpec& solver,
                                        int workers) {
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
  solver.validate();
  std::vector<PhasePoint> out(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) out[i] = evaluate_point(points[i], solver);
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), points.size());
  if (n_threads <= 1) {
    work();
    return out;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  return out;
}

std::vector<PhasePoint> phase_diagram(const GridSpec& grid, const SolverSpec& solver, int workers) {
  return evaluate_points(grid.points(), solver, workers);
}

std::vector<PhasePoint> multistability_map(const GridSpec& grid, double fixed_V, int workers,
                                           const mf::SearchOptions& search) {
  const bool axes_ok = (grid.axis1.parameter == Parameter::kG && grid.axis2.parameter == Parameter::kP) ||
                       (grid.axis1.parameter == Parameter::kP && grid.axis2.parameter == Parameter::kG);
  if (!axes_ok) throw InvalidArgument("multistability_map: grid axes must be g and p");
  GridSpec g = grid;
  g.fixed.V = fixed_V;
  SolverSpec solver = SolverSpec::mean_field();
  solver.search = search;
  return phase_diagram(g, solver, workers);
}

double critical_g_p1(double V, double Gamma) { return std::sqrt(16.0 * V * V + Gamma * Gamma) / 8.0; }

std::optional<std::array<double, 2>> critical_g_p0(double V, double Gamma) {
  const double disc = 4.0 * V * V - Gamma * Gamma;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  // The FM window closes where |8 g xi| = 1; Gamma^2 keeps this valid for Gamma != 1.
  const double g2 = Gamma * Gamma;
  return std::array<double, 2>{g2 / (8.0 * (2.0 * V + root)), g2 / (8.0 * (2.0 * V - root))};
}

std::vector<BoundaryRow> analytic_boundaries(const Axis& v_axis, double Gamma) {
  if (!(Gamma > 0.0)) throw InvalidArgument("analytic_boundaries: Gamma must be > 0");
  if (v_axis.count < 1) throw InvalidArgument("analytic_boundaries: V axis needs count >= 1");
  if (v_axis.count > 1 && !(v_axis.min < v_axis.max))
    throw InvalidArgument("analytic_boundaries: V axis needs min < max");
  std::vector<BoundaryRow> rows;
  for (double V : v_axis.values()) {
    BoundaryRow r;
    r.V = V;
    r.gc_p1 = critical_g_p1(V, Gamma);
    if (const auto c = critical_g_p0(V, Gamma); c && std::isfinite((*c)[0]) && std::isfinite((*c)[1])) {
      r.gplus_signed = (*c)[0];
      r.gminus_signed = (*c)[1];
      r.gplus_magnitude = std::abs((*c)[0]);
      r.gminus_magnitude = std::abs((*c)[1]);
    }
    rows.push_back(r);
  }
  return rows;
}

Direction parse_direction(const std::string& s) {
  if (s == "up") return Direction::kUp;
  if (s == "down") return Direction::kDown;
  if (s == "both") return Direction::kBoth;
  throw InvalidArgument("unknown sweep direction '" + s + "' (expected up, down or both)");
}

std::string to_string(Direction d) {
  switch (d) {
    case Direction::kUp: return "up";
    case Direction::kDown: return "down";
    case Direction::kBoth: return "both";
  }
  return "?";
}

void HysteresisSpec::validate() const {
  base.validate();
  if (p_values.empty()) throw InvalidArgument("hysteresis: p_values must not be empty");
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    if (!(p_values[i] >= 0.0 && p_values[i] <= 1.0)) throw InvalidArgument("hysteresis: p values must lie in [0, 1]");
    if (i > 0 && !(p_values[i] >= p_values[i - 1])) throw InvalidArgument("hysteresis: p values must be ascending");
  }
  if (solver == SolverSpec::Kind::kQuantum) {
    if (N < 1 || N > kMaxQuantumSpins) throw InvalidArgument("hysteresis: quantum solver needs 1 <= N <= 100");
    if (!(window >= 0.0)) throw InvalidArgument("hysteresis: window must be >= 0");
  } else if (!(settle_time > 0.0)) {
    throw InvalidArgument("hysteresis: settle_time must be > 0");
  }
  if (!(threshold > 0.0)) throw InvalidArgument("hysteresis: threshold must be > 0");
}

namespace {

std::vector<BranchPoint> run_branch(const HysteresisSpec& spec, bool upward) {
  std::vector<double> ps = spec.p_values;
  if (!upward) std::reverse(ps.begin(), ps.end());
  std::vector<BranchPoint> out;
  out.reserve(ps.size());

  if (spec.solver == SolverSpec::Kind::kMeanField) {
    std::vector<ModelParams> path;
    for (double p : ps) {
      ModelParams prm = spec.base;
      prm.p = p;
      path.push_back(prm);
    }
    for (const auto& c : mf::continuation_sweep_mf(path, spec.initial, spec.settle_time))
      out.push_back({c.params.p, c.state, c.converged});
  } else {
    const DickeBasis basis(spec.N);
    // Start in the Dicke state closest to the requested initial Z.
    const double m_target = spec.initial.Z * basis.j();
    int index = 0;
    for (int k = 1; k < basis.dim(); ++k)
      if (std::abs(basis.m(k) - m_target) < std::abs(basis.m(index) - m_target)) index = k;
    std::vector<RampStep> schedule;
    for (double p : ps) {
      ModelParams prm = spec.base;
      prm.p = p;
      prm.N = spec.N;
      schedule.push_back({prm, spec.window});
    }
    for (const auto& r : ramped_evolution(DensityMatrix::pure(basis, index), schedule))
      out.push_back({r.params.p, r.magnetization, true});
  }
  if (!upward) std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<Interval> bistable_runs(const std::vector<double>& p, const std::vector<BranchPoint>& up,
                                    const std::vector<BranchPoint>& down, double threshold) {
  if (up.size() != p.size() || down.size() != p.size()) throw InvalidArgument("bistable_runs: branch size mismatch");
  std::vector<Interval> runs;
  bool open = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool split = std::abs(up[i].state.Z - down[i].state.Z) > threshold;
    if (split && !open) {
      runs.push_back({p[i], p[i]});
      open = true;
    } else if (split) {
      runs.back().hi = p[i];
    } else {
      open = false;
    }
  }
  return runs;
}

HysteresisResult hysteresis_experiment(const HysteresisSpec& spec, int workers) {
  spec.validate();
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
  HysteresisResult res;
  res.p_values = spec.p_values;
  const bool want_up = spec.direction != Direction::kDown;
  const bool want_down = spec.direction != Direction::kUp;
  if (want_up && want_down && workers > 1) {
    std::jthread t([&] { res.down = run_branch(spec, false); });
    res.up = run_branch(spec, true);
  } else {
    if (want_up) res.up = run_branch(spec, true);
    if (want_down) res.down = run_branch(spec, false);
  }
  if (want_up && want_down) {
    res.bistable_runs = bistable_runs(res.p_values, res.up, res.down, spec.threshold);
    if (!res.bistable_runs.empty())
      res.bistable = Interval{res.bistable_runs.front().lo, res.bistable_runs.back().hi};
  }
  return res;
}

}  // namespace cising::sweep
