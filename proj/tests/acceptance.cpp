// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail K]...
//
// Exit status is 0 when every criterion passes, except those named with
// --expect-fail, which must fail. An expected failure that passes is an error too.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cising/cli/config.hpp"
#include "cising/cli/run.hpp"
#include "cising/collective_operators.hpp"
#include "cising/liouville.hpp"
#include "cising/meanfield.hpp"
#include "cising/sweep.hpp"
#include "cising/trajectory.hpp"
#include "support/generators.hpp"

using namespace cising;
using cising::testing::Gen;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kClosedFormTol = 1e-8;
constexpr double kC1Seconds = 10.0;
constexpr double kGridCell = 0.01;
constexpr double kP0UpperEdge = 2.4937, kP0UpperTol = 0.01;
constexpr double kP0LowerEdge = 0.0063, kP0LowerTol = 0.0005;
constexpr double kIdentityTol = 1e-10;
constexpr double kJacobianTol = 1e-6;
constexpr double kFdStep = 1e-6;
constexpr double kOscillationAmplitude = 0.01;
constexpr double kOrbitDifference = 0.01;
constexpr double kSuperoperatorTol = 1e-12;
constexpr double kSteadyTraceDistance = 1e-6;
constexpr double kC7Seconds = 60.0;
constexpr double kC8Seconds = 600.0;
constexpr double kGapRatio = 10.0;
constexpr double kHysteresisEdge = 0.77, kHysteresisEdgeTol = 0.02;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ModelParams params(double V, double g, double p, int N = 0) {
  ModelParams m;
  m.V = V;
  m.g = g;
  m.p = p;
  m.N = N;
  return m;
}

bool is_pole(const BlochVector& s) { return std::abs(s.Z + 1.0) < 1e-9; }

std::vector<double> grid(double lo, double hi, int count) {
  sweep::Axis a{sweep::Parameter::kG, lo, hi, count};
  return a.values();
}

// Midpoints of cells where a predicate flips along an ascending grid.
std::vector<double> transitions(const std::vector<double>& x, const std::vector<bool>& flag) {
  std::vector<double> out;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (flag[i] != flag[i - 1]) out.push_back(0.5 * (x[i] + x[i - 1]));
  return out;
}

Outcome c1_closed_form_p1() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int bad_count = 0;
  for (double g : grid(-2.4, 2.4, 100)) {
    const auto prm = params(-5, g, 1);
    const auto stable = mf::stable_only(mf::find_fixed_points(prm));
    const auto exact = mf::analytic_p1(prm);
    if (stable.size() != 1 || !exact) {
      ++bad_count;
      continue;
    }
    worst = std::max(worst, (stable[0].state.vec() - exact->vec()).cwiseAbs().maxCoeff());
  }
  const double t = seconds_since(t0);
  return {bad_count == 0 && worst < kClosedFormTol && t < kC1Seconds,
          std::to_string(bad_count) + " points without exactly one stable point, max deviation " +
              fmt("%.2e", worst) + ", " + fmt("%.2f", t) + " s"};
}

Outcome c2_boundary_p1() {
  const double gc = sweep::critical_g_p1(-5, 1);
  const auto g = grid(0.0, 3.0, 301);
  std::vector<bool> has(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    has[i] = !mf::stable_only(mf::find_fixed_points(params(-5, g[i], 1))).empty();
  const auto edges = transitions(g, has);
  const bool ok = edges.size() == 1 && std::abs(edges[0] - gc) <= 0.5 * kGridCell;
  return {ok, "loss of stable points at " + (edges.empty() ? std::string("none") : fmt("%.3f", edges[0])) +
                  " +- 0.005, " + std::to_string(edges.size()) + " transition(s), g_c = " + fmt("%.5f", gc)};
}

Outcome c3_window_p0() {
  // FM: the selection rule picks a point off the south pole.
  auto fm_flags = [](double V, const std::vector<double>& g) {
    std::vector<bool> fm(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      fm[i] = !is_pole(sweep::evaluate_point(params(V, g[i], 0), sweep::SolverSpec::mean_field()).selected);
    return fm;
  };
  std::vector<double> g = grid(0.0, 0.02, 101);
  const auto coarse = grid(0.025, 3.0, 596);
  g.insert(g.end(), coarse.begin(), coarse.end());
  const auto edges = transitions(g, fm_flags(-5, g));
  const bool edges_ok = edges.size() == 2 && std::abs(edges[0] - kP0LowerEdge) <= kP0LowerTol &&
                        std::abs(edges[1] - kP0UpperEdge) <= kP0UpperTol;
  std::string where;
  for (double e : edges) where += (where.empty() ? "" : ", ") + fmt("%.4f", e);

  const auto gn = grid(-3.0, 3.0, 121);
  const auto fm_weak = fm_flags(-0.4, gn);
  const bool none = std::none_of(fm_weak.begin(), fm_weak.end(), [](bool b) { return b; });
  return {edges_ok && none, "window edges at |g| = {" + where + "}, V = -0.4 FM points: " +
                                std::to_string(std::count(fm_weak.begin(), fm_weak.end(), true))};
}

Outcome c4_identities() {
  Gen gen(4);
  double norm_err = 0.0, rhs_err = 0.0;
  int candidates = 0;
  for (int i = 0; i < 1000; ++i) {
    auto prm = gen.params();
    prm.p = 0.0;
    for (const auto& c : mf::analytic_p0(prm)) {
      ++candidates;
      norm_err = std::max(norm_err, std::abs(c.state.norm_squared() - 1.0));
      rhs_err = std::max(rhs_err, mf::bloch_rhs(c.state, prm).norm());
    }
    prm.p = 1.0;
    if (const auto s = mf::analytic_p1(prm)) {
      ++candidates;
      norm_err = std::max(norm_err, std::abs(s->norm_squared() - 1.0));
      rhs_err = std::max(rhs_err, mf::bloch_rhs(*s, prm).norm());
    }
  }
  return {norm_err < kIdentityTol && rhs_err < kIdentityTol,
          std::to_string(candidates) + " states, max |r^2 - 1| " + fmt("%.2e", norm_err) + ", max |rhs| " +
              fmt("%.2e", rhs_err)};
}

Outcome c5_jacobian() {
  Gen gen(5);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto prm = gen.params();
    const auto s = gen.on_sphere();
    Eigen::Matrix3d fd;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d e = Eigen::Vector3d::Zero();
      e[k] = kFdStep;
      fd.col(k) = (mf::bloch_rhs(BlochVector::from(s.vec() + e), prm) -
                   mf::bloch_rhs(BlochVector::from(s.vec() - e), prm)) /
                  (2.0 * kFdStep);
    }
    const Eigen::Matrix3d a = mf::jacobian(s, prm);
    worst = std::max(worst, (a - fd).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff());
  }
  return {worst < kJacobianTol, "max relative error " + fmt("%.2e", worst) + " over 100 draws"};
}

Outcome c6_limit_cycles() {
  const auto prm = params(-5, 3, 1);
  const auto stable = mf::stable_only(mf::find_fixed_points(prm)).size();
  mf::TrajectoryOptions opt;
  opt.sample_interval = 0.01;
  std::vector<mf::LimitCycle> cycles;
  double min_amp = 1e300;
  for (const BlochVector s0 : {BlochVector{0, 0, 1}, BlochVector{0, 1, 0}, BlochVector{1, 0, 0}}) {
    const auto traj = mf::integrate_trajectory(s0, prm, 200.0, opt);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < traj.size(); ++i)
      if (traj.times[i] >= 100.0) {
        lo = std::min(lo, traj.states[i].Z);
        hi = std::max(hi, traj.states[i].Z);
      }
    min_amp = std::min(min_amp, hi - lo);
    try {
      if (const auto c = mf::detect_limit_cycle(traj, 0.5)) cycles.push_back(*c);
    } catch (const InsufficientData&) {
    }
  }
  int distinct_pairs = 0;
  for (std::size_t i = 0; i < cycles.size(); ++i)
    for (std::size_t j = i + 1; j < cycles.size(); ++j) {
      const auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
      if (rel(cycles[i].z_amplitude, cycles[j].z_amplitude) > kOrbitDifference ||
          rel(cycles[i].period, cycles[j].period) > kOrbitDifference)
        ++distinct_pairs;
    }
  std::string orbits;
  for (const auto& c : cycles)
    orbits += (orbits.empty() ? "" : "; ") + fmt("T=%.3f", c.period) + fmt(" A=%.4f", c.z_amplitude);
  return {stable == 0 && min_amp > kOscillationAmplitude && cycles.size() == 3 && distinct_pairs >= 1,
          std::to_string(stable) + " stable points, smallest amplitude " + fmt("%.4f", min_amp) + ", orbits {" +
              orbits + "}"};
}

Outcome c7_liouvillian() {
  const auto t0 = Clock::now();
  Gen gen(7);
  double trace_err = 0.0, herm_err = 0.0, kron_err = 0.0;
  for (int n = 1; n <= 6; ++n) {
    auto prm = gen.params();
    prm.N = n;
    const auto b = build_basis(n);
    const auto L = build_liouvillian(prm, b);
    const DirectLindblad direct(prm, b);
    for (int i = 0; i < 20; ++i) {
      const ComplexMatrix rho = gen.density(n + 1);
      const ComplexMatrix out = L.apply(rho);
      trace_err = std::max(trace_err, std::abs(out.trace()));
      herm_err = std::max(herm_err, (out - out.adjoint()).cwiseAbs().maxCoeff());
      kron_err = std::max(kron_err, (out - direct(rho)).cwiseAbs().maxCoeff());
    }
  }
  const auto prm = params(-5, 1, 1, 10);
  const auto b = build_basis(10);
  const auto ss = steady_state(build_liouvillian(prm, b));
  const auto late = evolve_rho(DensityMatrix::pure(b, 0), prm, 1000.0);
  const double dist = trace_distance(late.matrix, ss.rho.matrix);
  const double t = seconds_since(t0);
  return {trace_err < kSuperoperatorTol && herm_err < kSuperoperatorTol && kron_err < kSuperoperatorTol &&
              dist < kSteadyTraceDistance && t < kC7Seconds,
          "trace " + fmt("%.1e", trace_err) + ", hermiticity " + fmt("%.1e", herm_err) + ", kron-vs-direct " +
              fmt("%.1e", kron_err) + ", steady vs t=1000 distance " + fmt("%.1e", dist) + ", " +
              fmt("%.1f", t) + " s"};
}

Outcome c8_finite_size() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (double g : {0.5, 1.0}) {
    const double z_mf = mf::analytic_p1(params(-5, g, 1))->Z;
    double prev = 1e300;
    detail += (detail.empty() ? "" : "; ") + fmt("g=%.1f:", g);
    for (int n : {10, 20, 40}) {
      const auto prm = params(-5, g, 1, n);
      const double z = magnetization(steady_state(build_liouvillian(prm, build_basis(n))).rho).Z;
      const double d = std::abs(z - z_mf);
      ok = ok && d <= prev;
      prev = d;
      detail += " N=" + std::to_string(n) + " " + fmt("%.4f", d);
    }
  }
  const double t = seconds_since(t0);
  return {ok && t < kC8Seconds, "|Z_N - Z_mf| " + detail + ", " + fmt("%.1f", t) + " s"};
}

Outcome c9_gap() {
  SpectralOptions opt;
  opt.method = SpectralMethod::kIterative;
  auto gap = [&](int n, double g) {
    return liouvillian_gap(build_liouvillian(params(-5, g, 0, n), build_basis(n)), opt).gap;
  };
  const double g20 = gap(20, 1), g40 = gap(40, 1), g40_far = gap(40, 4);
  return {g40 < g20 && g40_far >= kGapRatio * g40,
          "gap(N=20,g=1) " + fmt("%.3e", g20) + ", gap(N=40,g=1) " + fmt("%.3e", g40) + ", gap(N=40,g=4) " +
              fmt("%.3e", g40_far)};
}

struct CountScan {
  int max_count = 0;
  int tristable = 0;
  double g = 0.0, p = 0.0;
};

CountScan count_scan(double g_lo, double g_hi) {
  sweep::GridSpec spec;
  spec.axis1 = {sweep::Parameter::kG, g_lo, g_hi, 21};
  spec.axis2 = {sweep::Parameter::kP, 0.1, 0.9, 41};
  CountScan out;
  for (const auto& pt : sweep::multistability_map(spec, -5.0, 1)) {
    if (pt.stable_count > out.max_count) {
      out.max_count = pt.stable_count;
      out.g = pt.params.g;
      out.p = pt.params.p;
    }
    out.tristable += pt.stable_count == 3;
  }
  return out;
}

Outcome c10_tristability() {
  const auto s = count_scan(0.5, 0.9);
  return {s.tristable > 0, "max stable_count " + std::to_string(s.max_count) + " over 21 x 41 grid, " +
                               std::to_string(s.tristable) + " tristable points"};
}

std::string c10_info() {
  const auto s = count_scan(-0.9, -0.5);
  return "same scan at g in [-0.9, -0.5]: max stable_count " + std::to_string(s.max_count) + ", " +
         std::to_string(s.tristable) + " tristable points, e.g. g=" + fmt("%.2f", s.g) + " p=" + fmt("%.2f", s.p);
}

std::optional<sweep::Interval> hysteresis_interval(sweep::SolverSpec::Kind kind, int n) {
  sweep::HysteresisSpec spec;
  spec.base = params(-5, -1, 0, n);
  spec.p_values = grid(0.0, 1.0, 101);
  spec.solver = kind;
  spec.N = n;
  return sweep::hysteresis_experiment(spec, 1).bistable;
}

std::string interval_text(const std::optional<sweep::Interval>& i) {
  return i ? "[" + fmt("%.2f", i->lo) + ", " + fmt("%.2f", i->hi) + "]" : std::string("none");
}

std::optional<sweep::Interval> c11_mf;

Outcome c11_hysteresis() {
  c11_mf = hysteresis_interval(sweep::SolverSpec::Kind::kMeanField, 0);
  const auto n20 = hysteresis_interval(sweep::SolverSpec::Kind::kQuantum, 20);
  const auto n40 = hysteresis_interval(sweep::SolverSpec::Kind::kQuantum, 40);
  const bool edge = c11_mf && std::abs(c11_mf->lo - kHysteresisEdge) <= kHysteresisEdgeTol;
  const bool nested = c11_mf && n20 && n40 && c11_mf->contains(*n20) && c11_mf->contains(*n40);
  const bool widening = n20 && n40 && n40->width() > n20->width();
  return {edge && nested && widening, "MF " + interval_text(c11_mf) + " (edge at 0.77 is the lower one), N=20 " +
                                          interval_text(n20) + ", N=40 " + interval_text(n40)};
}

std::map<std::string, std::string> run_csv(const cli::RunConfig& cfg, const fs::path& dir) {
  fs::remove_all(dir);
  cli::run(cfg, dir);
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

Outcome c12_determinism() {
  const auto base = fs::temp_directory_path() / "cising_acceptance";
  const std::vector<std::string> configs{
      R"({"task": "mf-phase-diagram", "model": {"V": -5, "p": 0.5}, "rng_seed": 3,
          "grid": {"axis1": {"parameter": "g", "min": -3, "max": 3, "count": 13},
                   "axis2": {"parameter": "p", "min": 0, "max": 1, "count": 11}}})",
      R"({"task": "quantum-gap", "model": {"V": -5, "g": 1, "p": 0}, "rng_seed": 3,
          "grid": {"axis1": {"parameter": "g", "min": 0, "max": 3, "count": 7}},
          "quantum": {"N": [6, 12]}})",
      R"({"task": "hysteresis", "model": {"V": -5, "g": -1}, "rng_seed": 3,
          "hysteresis": {"p_count": 21, "branches": [{"solver": "mean-field"}, {"solver": "quantum", "N": 6}]}})"};
  int identical = 0, total = 0;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    auto cfg = cli::parse_config(nlohmann::json::parse(configs[k]));
    std::map<std::string, std::string> reference;
    for (int rep = 0; rep < 2; ++rep)
      for (int w : {1, 8}) {
        cfg.workers = w;
        const auto files = run_csv(cfg, base / ("c" + std::to_string(k) + "_" + std::to_string(w)));
        if (reference.empty()) {
          reference = files;
          continue;
        }
        ++total;
        identical += files == reference;
      }
  }
  fs::remove_all(base);
  return {identical == total, std::to_string(identical) + "/" + std::to_string(total) +
                                  " re-runs byte-identical across workers 1 and 8 (3 sweep configs)"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected_fail;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--expect-fail" && i + 1 < argc) {
      expected_fail.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--expect-fail K]...\n", argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"closed-form p=1 agreement", c1_closed_form_p1},
      {"p=1 phase boundary", c2_boundary_p1},
      {"p=0 critical points", c3_window_p0},
      {"normalization identities", c4_identities},
      {"jacobian oracle", c5_jacobian},
      {"limit-cycle regime", c6_limit_cycles},
      {"liouvillian correctness", c7_liouvillian},
      {"finite-size convergence", c8_finite_size},
      {"gap closure trend", c9_gap},
      {"tristability existence", c10_tristability},
      {"MF hysteresis edge", c11_hysteresis},
      {"determinism", c12_determinism},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool xfail = expected_fail.count(id) > 0;
    std::printf("%s %2d %s: %s [%.1f s]%s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(),
                seconds_since(t0), xfail ? " (expected failure)" : "");
    if (id == 10) std::printf("INFO 10 %s\n", c10_info().c_str());
    if (id == 11 && c11_mf) std::printf("INFO 11 MF upper edge p = %.2f\n", c11_mf->hi);
    std::fflush(stdout);
    if (o.pass == xfail) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
