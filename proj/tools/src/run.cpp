#include "cising/cli/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#include <Eigen/Core>

#include "cising/error.hpp"
#include "cising/meanfield.hpp"
#include "cising/trajectory.hpp"

#ifndef CISING_VERSION
#define CISING_VERSION "unknown"
#endif

namespace cising::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Cell flag(bool b) { return std::int64_t{b ? 1 : 0}; }
Cell integer(long long v) { return std::int64_t{v}; }
double value_or_nan(const std::optional<double>& x) { return x.value_or(kNaN); }

std::string stability_name(mf::Stability s) {
  switch (s) {
    case mf::Stability::kStable: return "stable";
    case mf::Stability::kMarginal: return "marginal";
    case mf::Stability::kUnstable: return "unstable";
  }
  return "?";
}

std::vector<ModelParams> scan_points(const RunConfig& cfg) {
  if (!cfg.grid) return {cfg.model};
  if (cfg.grid->axis2) return sweep::GridSpec{cfg.grid->axis1, *cfg.grid->axis2, cfg.model}.points();
  std::vector<ModelParams> out;
  for (double v : cfg.grid->axis1.values()) {
    ModelParams m = cfg.model;
    sweep::set(m, cfg.grid->axis1.parameter, v);
    m.validate();
    out.push_back(m);
  }
  return out;
}

sweep::SolverSpec mean_field_solver(const RunConfig& cfg) {
  auto s = sweep::SolverSpec::mean_field();
  s.search = cfg.search_options();
  s.settle_time_max = cfg.selection.settle_time_max;
  s.cycle_time = cfg.selection.cycle_time;
  return s;
}

std::vector<Table> fixed_points(const RunConfig& cfg) {
  Table t{"fixed_points",
          {"index", "X", "Y", "Z", "stability", "residual", "lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im",
           "lambda3_re", "lambda3_im"},
          {}};
  const auto fps = mf::find_fixed_points(cfg.model, cfg.search_options());
  for (std::size_t i = 0; i < fps.size(); ++i) {
    const auto& f = fps[i];
    std::vector<Cell> row{integer(static_cast<long long>(i)), f.state.X, f.state.Y, f.state.Z,
                          stability_name(f.stability), f.residual};
    for (const auto& l : f.jacobian_eigenvalues) {
      row.emplace_back(l.real());
      row.emplace_back(l.imag());
    }
    t.add(std::move(row));
  }
  std::vector<Table> out{std::move(t)};

  if (cfg.model.p == 1.0 || cfg.model.p == 0.0) {
    Table a{"analytic", {"branch", "X", "Y", "Z"}, {}};
    if (cfg.model.p == 1.0) {
      if (const auto s = mf::analytic_p1(cfg.model)) a.add({std::string("p1"), s->X, s->Y, s->Z});
    } else {
      for (const auto& c : mf::analytic_p0(cfg.model)) a.add({c.label(), c.state.X, c.state.Y, c.state.Z});
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Table> mf_evolve(const RunConfig& cfg) {
  Table traj{"trajectory", {"initial", "t", "X", "Y", "Z"}, {}};
  Table orbits{"orbits",
               {"initial", "X0", "Y0", "Z0", "X_end", "Y_end", "Z_end", "limit_cycle", "period", "z_amplitude",
                "note"},
               {}};
  mf::TrajectoryOptions opt;
  opt.rel_tol = cfg.evolve.rel_tol;
  opt.abs_tol = cfg.evolve.abs_tol;
  opt.sample_interval = cfg.evolve.sample_interval;
  for (std::size_t i = 0; i < cfg.evolve.initial_states.size(); ++i) {
    const auto& s0 = cfg.evolve.initial_states[i];
    const auto tr = mf::integrate_trajectory(s0, cfg.model, cfg.evolve.t_end, opt);
    for (std::size_t k = 0; k < tr.size(); ++k)
      traj.add({integer(static_cast<long long>(i)), tr.times[k], tr.states[k].X, tr.states[k].Y, tr.states[k].Z});
    std::optional<mf::LimitCycle> cycle;
    std::string note;
    try {
      cycle = mf::detect_limit_cycle(tr, cfg.evolve.transient_fraction);
    } catch (const InsufficientData& e) {
      note = e.what();
    }
    orbits.add({integer(static_cast<long long>(i)), s0.X, s0.Y, s0.Z, tr.back().X, tr.back().Y, tr.back().Z,
                flag(cycle.has_value()), cycle ? cycle->period : kNaN, cycle ? cycle->z_amplitude : kNaN, note});
  }
  return {std::move(traj), std::move(orbits)};
}

std::vector<Table> mf_grid(const RunConfig& cfg) {
  const auto points = scan_points(cfg);
  const auto res = sweep::evaluate_points(points, mean_field_solver(cfg), cfg.workers);
  const bool multi = cfg.task == Task::kMultistability;
  Table t{multi ? "multistability" : "phase_diagram",
          {"V", "g", "p", "Gamma", "stable_count", "selected_X", "selected_Y", "selected_Z", "selected_converged",
           "limit_cycle", "leading_real_part", "error"},
          {}};
  Table sp{"stable_points", {"V", "g", "p", "index", "X", "Y", "Z", "max_real_part"}, {}};
  for (const auto& r : res) {
    const auto& m = r.params;
    const bool ok = r.ok();
    t.add({m.V, m.g, m.p, m.Gamma, integer(ok ? r.stable_count : -1), ok ? r.selected.X : kNaN,
           ok ? r.selected.Y : kNaN, ok ? r.selected_Z : kNaN, flag(r.selected_converged), flag(r.limit_cycle),
           value_or_nan(r.leading_real_part), r.error});
    for (std::size_t i = 0; i < r.stable_points.size(); ++i) {
      const auto& f = r.stable_points[i];
      sp.add({m.V, m.g, m.p, integer(static_cast<long long>(i)), f.state.X, f.state.Y, f.state.Z,
              f.max_real_part()});
    }
  }
  return {std::move(t), std::move(sp)};
}

std::vector<Table> quantum_scan(const RunConfig& cfg) {
  const bool with_gap = cfg.task == Task::kQuantumGap;
  const auto points = scan_points(cfg);
  std::vector<double> z_mf(points.size(), kNaN);
  if (cfg.quantum.mean_field_reference) {
    const auto mf_res = sweep::evaluate_points(points, mean_field_solver(cfg), cfg.workers);
    for (std::size_t i = 0; i < points.size(); ++i)
      if (mf_res[i].ok()) z_mf[i] = mf_res[i].selected_Z;
  }
  std::vector<std::string> cols{"N", "V", "g", "p", "Gamma"};
  if (with_gap) cols.emplace_back("gap");
  for (const char* c : {"X", "Y", "Z", "Z_mf", "error"}) cols.emplace_back(c);
  Table t{with_gap ? "gap" : "steady_state", cols, {}};
  for (int n : cfg.quantum.N) {
    auto solver = sweep::SolverSpec::quantum(n, with_gap);
    solver.gap_method = cfg.quantum.method;
    const auto res = sweep::evaluate_points(points, solver, cfg.workers);
    for (std::size_t i = 0; i < res.size(); ++i) {
      const auto& r = res[i];
      const auto& m = points[i];
      std::vector<Cell> row{integer(n), m.V, m.g, m.p, m.Gamma};
      if (with_gap) row.emplace_back(value_or_nan(r.gap));
      const bool ok = r.ok();
      row.emplace_back(ok ? r.selected.X : kNaN);
      row.emplace_back(ok ? r.selected.Y : kNaN);
      row.emplace_back(ok ? r.selected.Z : kNaN);
      row.emplace_back(z_mf[i]);
      row.emplace_back(r.error);
      t.add(std::move(row));
    }
  }
  return {std::move(t)};
}

std::vector<Table> quantum_evolve(const RunConfig& cfg) {
  const auto& q = cfg.quantum_evolve;
  const DickeBasis basis(cfg.model.N);
  DensityMatrix rho = q.initial == "north"   ? DensityMatrix::pure(basis, 0)
                      : q.initial == "south" ? DensityMatrix::pure(basis, basis.dim() - 1)
                                             : DensityMatrix::maximally_mixed(basis);
  EvolveOptions opt{q.rel_tol, q.abs_tol};
  Table t{"evolution", {"t", "X", "Y", "Z", "trace_error", "hermiticity_error"}, {}};
  const auto add = [&](double time) {
    const auto m = magnetization(rho);
    t.add({time, m.X, m.Y, m.Z, std::abs(rho.trace() - Complex(1.0, 0.0)), rho.hermiticity_error()});
  };
  add(0.0);
  const double dt = q.t_end / q.samples;
  for (int k = 1; k <= q.samples; ++k) {
    rho = evolve_rho(rho, cfg.model, dt, opt);
    add(k == q.samples ? q.t_end : k * dt);
  }
  return {std::move(t)};
}

std::vector<Table> hysteresis(const RunConfig& cfg) {
  const auto& h = cfg.hysteresis;
  Table t{"hysteresis", {"solver", "N", "direction", "p", "X", "Y", "Z", "converged"}, {}};
  Table iv{"bistable_intervals", {"solver", "N", "kind", "lo", "hi"}, {}};
  for (const auto& b : h.branches) {
    sweep::HysteresisSpec spec;
    spec.base = cfg.model;
    spec.p_values = h.p_values();
    spec.direction = h.direction;
    spec.solver = b.kind;
    spec.N = b.N;
    spec.settle_time = h.settle_time;
    spec.window = h.window;
    spec.threshold = h.threshold;
    spec.initial = h.initial;
    const auto res = sweep::hysteresis_experiment(spec, cfg.workers);
    const std::string solver = b.kind == sweep::SolverSpec::Kind::kMeanField ? "mean-field" : "quantum";
    const auto emit = [&](const char* dir, const std::vector<sweep::BranchPoint>& pts) {
      for (const auto& p : pts)
        t.add({solver, integer(b.N), std::string(dir), p.p, p.state.X, p.state.Y, p.state.Z, flag(p.converged)});
    };
    emit("up", res.up);
    emit("down", res.down);
    for (const auto& r : res.bistable_runs) iv.add({solver, integer(b.N), std::string("run"), r.lo, r.hi});
    if (res.bistable) iv.add({solver, integer(b.N), std::string("hull"), res.bistable->lo, res.bistable->hi});
  }
  return {std::move(t), std::move(iv)};
}

std::vector<Table> boundaries(const RunConfig& cfg) {
  Table t{"boundaries",
          {"V", "gc_p1", "gplus_c", "gminus_c", "gplus_c_signed", "gminus_c_signed", "Vc_p0"},
          {}};
  const double vc = sweep::critical_V_p0(cfg.model.Gamma);
  for (const auto& r : sweep::analytic_boundaries(cfg.boundaries, cfg.model.Gamma))
    t.add({r.V, r.gc_p1, value_or_nan(r.gplus_magnitude), value_or_nan(r.gminus_magnitude),
           value_or_nan(r.gplus_signed), value_or_nan(r.gminus_signed), vc});
  return {std::move(t)};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<Table> compute(const RunConfig& cfg) {
  switch (cfg.task) {
    case Task::kMfFixedPoints: return fixed_points(cfg);
    case Task::kMfEvolve: return mf_evolve(cfg);
    case Task::kMfPhaseDiagram:
    case Task::kMultistability: return mf_grid(cfg);
    case Task::kQuantumSteady:
    case Task::kQuantumGap: return quantum_scan(cfg);
    case Task::kQuantumEvolve: return quantum_evolve(cfg);
    case Task::kHysteresis: return hysteresis(cfg);
    case Task::kBoundaries: return boundaries(cfg);
  }
  return {};
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg, const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (!cfg.output_directory.empty()) return cfg.output_directory;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return ".";
}

json metadata(const RunConfig& cfg, const Timings& timings, const std::vector<std::string>& files) {
  json t = json::object();
  for (const auto& [stage, secs] : timings) t[stage] = secs;
  return {
      {"tool", {{"name", kToolName}, {"version", CISING_VERSION}}},
      {"versions",
       {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
      {"config", to_json(cfg)},
      {"rng_seed", cfg.rng_seed},
      {"timings_seconds", t},
      {"files", files},
  };
}

void write_metadata(const RunConfig& cfg, const Timings& timings, const std::vector<std::string>& files,
                    const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << metadata(cfg, timings, files).dump(2) << '\n';
  f.close();
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

RunSummary run(const RunConfig& cfg, const std::filesystem::path& dir, Timings timings) {
  RunSummary s;
  s.timings = std::move(timings);
  s.directory = dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  auto t0 = std::chrono::steady_clock::now();
  const auto tables = compute(cfg);
  s.timings.emplace_back("compute", seconds_since(t0));

  t0 = std::chrono::steady_clock::now();
  for (const auto& t : tables) {
    const std::string file = t.name + ".csv";
    write_table(t, dir / file);
    s.files.push_back(file);
  }
  s.timings.emplace_back("write", seconds_since(t0));
  write_metadata(cfg, s.timings, s.files, dir / "metadata.json");
  return s;
}

}  // namespace cising::cli
