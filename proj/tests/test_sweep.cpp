#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "cising/error.hpp"
#include "cising/sweep.hpp"

using namespace cising;
using namespace cising::sweep;

namespace {

ModelParams params(double V, double g, double p) { return {V, g, 1.0, p, 0}; }

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool identical(const PhasePoint& a, const PhasePoint& b) {
  if (!(a.params == b.params) || a.stable_count != b.stable_count || a.limit_cycle != b.limit_cycle ||
      a.error != b.error || a.selected_converged != b.selected_converged)
    return false;
  if (!same_bits(a.selected.X, b.selected.X) || !same_bits(a.selected.Y, b.selected.Y) ||
      !same_bits(a.selected.Z, b.selected.Z))
    return false;
  for (std::size_t i = 0; i < a.stable_points.size(); ++i)
    if (!(a.stable_points[i].state == b.stable_points[i].state)) return false;
  return a.gap == b.gap;
}

bool is_pole(const BlochVector& s) { return std::abs(s.Z + 1.0) < 1e-9; }

}  // namespace

TEST_CASE("parameter names round-trip") {
  for (auto p : {Parameter::kV, Parameter::kG, Parameter::kP}) CHECK(parse_parameter(to_string(p)) == p);
  CHECK_THROWS_AS(parse_parameter("Gamma"), InvalidArgument);
  for (auto d : {Direction::kUp, Direction::kDown, Direction::kBoth}) CHECK(parse_direction(to_string(d)) == d);
  CHECK_THROWS_AS(parse_direction("sideways"), InvalidArgument);
}

TEST_CASE("axis values hit both endpoints") {
  const Axis a{Parameter::kG, -4.0, 4.0, 50};
  const auto v = a.values();
  REQUIRE(v.size() == 50);
  CHECK(v.front() == -4.0);
  CHECK(v.back() == 4.0);
  for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] > v[i - 1]);
}

TEST_CASE("grid points are row-major") {
  const GridSpec grid{{Parameter::kV, -2, 0, 3}, {Parameter::kG, 0, 1, 2}, params(0, 0, 0.5)};
  const auto pts = grid.points();
  REQUIRE(pts.size() == 6);
  CHECK(pts[0].V == -2);
  CHECK(pts[0].g == 0);
  CHECK(pts[1].V == -2);
  CHECK(pts[1].g == 1);
  CHECK(pts[2].V == -1);
  CHECK(pts[5].V == 0);
  for (const auto& p : pts) CHECK(p.p == 0.5);
}

TEST_CASE("grid validation names the broken invariant") {
  const auto base = params(-5, 0, 0);
  CHECK_THROWS_WITH_AS(GridSpec({Parameter::kG, 0, 1, 1}, {Parameter::kP, 0, 1, 2}, base).validate(),
                       doctest::Contains("count >= 2"), InvalidArgument);
  CHECK_THROWS_WITH_AS(GridSpec({Parameter::kG, 1, 1, 3}, {Parameter::kP, 0, 1, 2}, base).validate(),
                       doctest::Contains("min < max"), InvalidArgument);
  CHECK_THROWS_WITH_AS(GridSpec({Parameter::kG, 0, 1, 3}, {Parameter::kG, 0, 1, 2}, base).validate(),
                       doctest::Contains("distinct"), InvalidArgument);
  CHECK_THROWS_AS(GridSpec({Parameter::kG, 0, 1, 3}, {Parameter::kP, 0, 2, 2}, base).points(), InvalidArgument);
}

TEST_CASE("solver validation") {
  CHECK_NOTHROW(SolverSpec::quantum(100).validate());
  CHECK_THROWS_AS(SolverSpec::quantum(101).validate(), InvalidArgument);
  CHECK_THROWS_AS(SolverSpec::quantum(0).validate(), InvalidArgument);
}

TEST_CASE("evaluate_point records failures instead of throwing") {
  const auto pt = evaluate_point(params(-5, 1, 1.5), SolverSpec::mean_field());
  CHECK_FALSE(pt.ok());
  CHECK(pt.error.find("p must satisfy") != std::string::npos);
  const auto q = evaluate_point(params(-5, 1, 1), SolverSpec::quantum(500));
  CHECK_FALSE(q.ok());
}

TEST_CASE("selection picks the pole when it is stable") {
  const auto prm = params(-5, 0.003, 0);
  const auto st = mf::stable_only(mf::find_fixed_points(prm));
  CHECK(st.size() == 3);
  const auto sel = select_from_south_pole(prm, st, 1e5);
  CHECK(sel.converged);
  CHECK(is_pole(sel.state));
}

TEST_CASE("p = 0 counts and selected branch at V = -5") {
  const auto in = evaluate_point(params(-5, 1, 0), SolverSpec::mean_field());
  CHECK(in.stable_count == 2);
  CHECK_FALSE(is_pole(in.selected));
  CHECK(in.selected_Z == doctest::Approx(-0.40101).epsilon(1e-4));
  const auto above = evaluate_point(params(-5, 3, 0), SolverSpec::mean_field());
  CHECK(above.stable_count == 1);
  CHECK(is_pole(above.selected));
  // Below the lower edge the FM pair survives next to the pole; the pole is selected.
  const auto below = evaluate_point(params(-5, 0.004, 0), SolverSpec::mean_field());
  CHECK(below.stable_count == 3);
  CHECK(is_pole(below.selected));
}

TEST_CASE("no FM window above V^c") {
  for (int i = 0; i <= 40; ++i) {
    const auto pt = evaluate_point(params(-0.4, 0.1 * i, 0), SolverSpec::mean_field());
    CAPTURE(pt.params.g);
    CHECK(is_pole(pt.selected));
  }
}

TEST_CASE("p = 1 orbit from the pole locks onto a coexisting cycle") {
  // The stable point survives, but the tilted pole flows to a limit cycle instead.
  const auto pt = evaluate_point(params(-5, 2, 1), SolverSpec::mean_field());
  REQUIRE(pt.stable_count == 1);
  CHECK(pt.limit_cycle);
  CHECK_FALSE(pt.selected_converged);
  const auto exact = mf::analytic_p1(params(-5, 2, 1));
  REQUIRE(exact);
  CHECK((pt.selected.vec() - exact->vec()).norm() < 1e-8);
  const auto near = evaluate_point(params(-5, 0.5, 1), SolverSpec::mean_field());
  CHECK_FALSE(near.limit_cycle);
  CHECK(near.selected_converged);
}

TEST_CASE("p = 1 beyond the edge: no stable points, limit cycle flagged") {
  for (double g : {2.6, 3.0, 4.0, -3.0}) {
    const auto pt = evaluate_point(params(-5, g, 1), SolverSpec::mean_field());
    CAPTURE(g);
    CHECK(pt.ok());
    CHECK(pt.stable_count == 0);
    CHECK(pt.limit_cycle);
    // Off-sphere roots are discarded, so there may be no fixed point at all.
    if (pt.leading_real_part) CHECK(*pt.leading_real_part > 0.0);
  }
}

TEST_CASE("p = 1 boundary brackets sqrt(16 V^2 + 1)/8 on a fine grid") {
  const double gc = critical_g_p1(-5, 1);
  CHECK(gc == doctest::Approx(2.50312).epsilon(1e-5));
  for (double sign : {1.0, -1.0}) {
    const double lo = sign * (gc - 0.004), hi = sign * (gc + 0.006);
    CHECK(evaluate_point(params(-5, lo, 1), SolverSpec::mean_field()).stable_count == 1);
    CHECK(evaluate_point(params(-5, hi, 1), SolverSpec::mean_field()).stable_count == 0);
  }
}

TEST_CASE("phase diagram output is identical for 1 and 8 workers") {
  const GridSpec grid{{Parameter::kG, -3, 3, 7}, {Parameter::kP, 0, 1, 5}, params(-5, 0, 0)};
  const auto a = phase_diagram(grid, SolverSpec::mean_field(), 1);
  const auto b = phase_diagram(grid, SolverSpec::mean_field(), 8);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(identical(a[i], b[i]));
  for (const auto& pt : a) {
    CHECK(pt.stable_count == static_cast<int>(pt.stable_points.size()));
    CHECK(pt.selected_Z >= -1.0);
    CHECK(pt.selected_Z <= 1.0);
  }
}

TEST_CASE("multistability map rejects non (g, p) grids") {
  const GridSpec bad{{Parameter::kV, -3, 3, 3}, {Parameter::kP, 0, 1, 3}, params(-5, 0, 0)};
  CHECK_THROWS_AS(multistability_map(bad, -5, 1), InvalidArgument);
  const GridSpec good{{Parameter::kP, 0, 1, 3}, {Parameter::kG, 0.5, 1.0, 3}, params(0, 0, 0)};
  for (const auto& pt : multistability_map(good, -5, 2)) CHECK(pt.params.V == -5);
}

TEST_CASE("quantum solver points") {
  auto solver = SolverSpec::quantum(10, true);
  const auto pt = evaluate_point(params(-5, 1, 1), solver);
  REQUIRE(pt.ok());
  CHECK(pt.params.N == 10);
  CHECK(std::abs(pt.selected_Z - mf::analytic_p1(params(-5, 1, 1))->Z) < 0.1);
  REQUIRE(pt.gap);
  CHECK(*pt.gap > 0.0);
}

TEST_CASE("analytic boundaries") {
  const auto rows = analytic_boundaries({Parameter::kV, -5, 0, 11}, 1.0);
  REQUIRE(rows.size() == 11);
  const auto& r5 = rows[0];
  CHECK(r5.V == -5);
  REQUIRE(r5.gplus_magnitude);
  CHECK(*r5.gplus_magnitude == doctest::Approx(2.4937).epsilon(1e-4));
  CHECK(*r5.gminus_magnitude == doctest::Approx(0.0062657).epsilon(1e-4));
  CHECK(*r5.gplus_signed < 0.0);
  const auto& r05 = rows[9];
  CHECK(r05.V == doctest::Approx(-0.5));
  REQUIRE(r05.gplus_magnitude);
  CHECK(*r05.gplus_magnitude == doctest::Approx(*r05.gminus_magnitude).epsilon(1e-6));
  CHECK_FALSE(rows[10].gplus_magnitude);
  CHECK(rows[10].gc_p1 == doctest::Approx(0.125));
  CHECK(critical_V_p0(1.0) == -0.5);
  CHECK_THROWS_AS(analytic_boundaries({Parameter::kV, -5, 0, 3}, 0.0), InvalidArgument);
}

TEST_CASE("FM window edges from the closed form agree with the selection rule") {
  const auto c = critical_g_p0(-5, 1);
  REQUIRE(c);
  const double hi = std::abs((*c)[0]), lo = std::abs((*c)[1]);
  CHECK(is_pole(evaluate_point(params(-5, lo - 0.0003, 0), SolverSpec::mean_field()).selected));
  CHECK_FALSE(is_pole(evaluate_point(params(-5, lo + 0.0003, 0), SolverSpec::mean_field()).selected));
  CHECK_FALSE(is_pole(evaluate_point(params(-5, hi - 0.005, 0), SolverSpec::mean_field()).selected));
  CHECK(is_pole(evaluate_point(params(-5, hi + 0.005, 0), SolverSpec::mean_field()).selected));
}

TEST_CASE("bistable runs") {
  const std::vector<double> p{0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<BranchPoint> up, down;
  const double dz[] = {0, 0.1, 0.2, 0, 0.06, 0.01};
  for (std::size_t i = 0; i < p.size(); ++i) {
    up.push_back({p[i], {0, 0, -1}, true});
    down.push_back({p[i], {0, 0, -1 + dz[i]}, true});
  }
  const auto runs = bistable_runs(p, up, down, 0.05);
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].lo == 0.1);
  CHECK(runs[0].hi == 0.2);
  CHECK(runs[1].lo == 0.4);
  CHECK(runs[1].hi == 0.4);
  CHECK(Interval{0.0, 1.0}.contains(runs[0]));
  CHECK_FALSE(runs[0].contains(Interval{0.0, 0.2}));
  up.pop_back();
  CHECK_THROWS_AS(bistable_runs(p, up, down, 0.05), InvalidArgument);
}

TEST_CASE("hysteresis with a single p value gives identical points") {
  HysteresisSpec spec;
  spec.base = params(-5, -1, 0);
  spec.p_values = {0.8};
  const auto r = hysteresis_experiment(spec);
  REQUIRE(r.up.size() == 1);
  REQUIRE(r.down.size() == 1);
  CHECK(r.up[0].state == r.down[0].state);
  CHECK_FALSE(r.bistable);
}

TEST_CASE("hysteresis directions and validation") {
  HysteresisSpec spec;
  spec.base = params(-5, -1, 0);
  spec.p_values = {0.0, 0.5, 1.0};
  spec.direction = Direction::kUp;
  const auto r = hysteresis_experiment(spec);
  CHECK(r.up.size() == 3);
  CHECK(r.down.empty());
  spec.p_values = {0.5, 0.2};
  CHECK_THROWS_AS(hysteresis_experiment(spec), InvalidArgument);
  spec.p_values = {0.2, 0.5};
  spec.solver = SolverSpec::Kind::kQuantum;
  spec.N = 0;
  CHECK_THROWS_AS(hysteresis_experiment(spec), InvalidArgument);
}

TEST_CASE("mean-field hysteresis at g = -1 and a small quantum system") {
  HysteresisSpec spec;
  spec.base = params(-5, -1, 0);
  for (int i = 0; i <= 100; ++i) spec.p_values.push_back(i / 100.0);
  const auto mf_res = hysteresis_experiment(spec, 2);
  REQUIRE(mf_res.bistable);
  MESSAGE("mean-field bistable interval [" << mf_res.bistable->lo << ", " << mf_res.bistable->hi << "]");
  CHECK(mf_res.bistable->width() > 0.1);
  for (std::size_t i = 0; i < spec.p_values.size(); ++i) {
    CHECK(mf_res.up[i].p == spec.p_values[i]);
    CHECK(mf_res.down[i].p == spec.p_values[i]);
  }

  spec.solver = SolverSpec::Kind::kQuantum;
  spec.N = 10;
  spec.p_values.clear();
  for (int i = 0; i <= 100; ++i) spec.p_values.push_back(i / 100.0);
  const auto q = hysteresis_experiment(spec);
  double widest = 0.0;
  for (std::size_t i = 0; i < q.up.size(); ++i) widest = std::max(widest, std::abs(q.up[i].state.Z - q.down[i].state.Z));
  MESSAGE("N=10 largest branch separation " << widest);
  CHECK_FALSE(q.bistable);
}
