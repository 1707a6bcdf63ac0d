#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cising/liouville.hpp"
#include "cising/meanfield.hpp"
#include "cising/model.hpp"
#include "cising/trajectory.hpp"

namespace cising::sweep {

enum class Parameter { kV, kG, kP };

Parameter parse_parameter(const std::string& name);
std::string to_string(Parameter p);
double get(const ModelParams& params, Parameter which);
void set(ModelParams& params, Parameter which, double value);

struct Axis {
  Parameter parameter = Parameter::kG;
  double min = 0.0;
  double max = 1.0;
  int count = 2;

  /// Evenly spaced values, endpoints included.
  std::vector<double> values() const;
};

struct GridSpec {
  Axis axis1;
  Axis axis2;
  ModelParams fixed;

  void validate() const;
  /// Row-major: index = i1 * axis2.count + i2.
  std::vector<ModelParams> points() const;
};

struct SolverSpec {
  enum class Kind { kMeanField, kQuantum };
  Kind kind = Kind::kMeanField;
  int N = 0;  // quantum only
  bool compute_gap = false;
  mf::SearchOptions search;
  double settle_time_max = 1e5;  // cap for the branch-selection integration
  double cycle_time = 200.0;     // limit-cycle probe length when no stable point exists
  SpectralMethod gap_method = SpectralMethod::kAuto;

  static SolverSpec mean_field() { return {}; }
  static SolverSpec quantum(int n, bool gap = false);
  void validate() const;
};

inline constexpr int kMaxQuantumSpins = 100;

struct PhasePoint {
  ModelParams params;
  std::vector<mf::FixedPoint> stable_points;
  int stable_count = 0;
  BlochVector selected;
  double selected_Z = 0.0;
  bool selected_converged = false;
  bool limit_cycle = false;  // mean-field orbit from the south pole ends on a limit cycle
  // Smallest leading Jacobian real part over all fixed points found (mean-field only).
  std::optional<double> leading_real_part;
  std::optional<double> gap;
  std::string error;  // non-empty when the point failed

  bool ok() const noexcept { return error.empty(); }
};

/// The branch-selection rule used for contour data: the stable fixed point
/// reached by integrating from (a slight tilt of) the south pole. When the
/// south pole is itself a stable fixed point it is selected directly. If the
/// orbit settles onto a limit cycle or runs out of time, the stable point
/// closest to the south pole is returned with converged = false.
struct Selection {
  BlochVector state;
  bool converged = false;
  bool limit_cycle = false;  // the orbit from the pole locked onto a limit cycle
};
Selection select_from_south_pole(const ModelParams& params, const std::vector<mf::FixedPoint>& stable,
                                 double t_max);

/// Evaluates one parameter set with the requested solver. Never throws;
/// failures land in PhasePoint::error.
PhasePoint evaluate_point(const ModelParams& params, const SolverSpec& solver);

/// Evaluates a list of points on `workers` threads. Output order equals input order.
std::vector<PhasePoint> evaluate_points(const std::vector<ModelParams>& points, const SolverSpec& solver,
                                        int workers);

std::vector<PhasePoint> phase_diagram(const GridSpec& grid, const SolverSpec& solver, int workers);

/// Stable-count map over a (g, p) grid at fixed V.
std::vector<PhasePoint> multistability_map(const GridSpec& grid, double fixed_V, int workers,
                                           const mf::SearchOptions& search = {});

struct BoundaryRow {
  double V = 0.0;
  double gc_p1 = 0.0;  // sqrt(16 V^2 + Gamma^2) / 8
  std::optional<double> gplus_signed;
  std::optional<double> gminus_signed;
  std::optional<double> gplus_magnitude;
  std::optional<double> gminus_magnitude;
};

/// p = 1 critical coupling sqrt(16 V^2 + Gamma^2) / 8.
double critical_g_p1(double V, double Gamma);
/// p = 0 FM-window endpoints (signed), present only where 4 V^2 >= Gamma^2.
std::optional<std::array<double, 2>> critical_g_p0(double V, double Gamma);
/// Critical interaction V^c = -Gamma/2 below which the p = 0 FM window opens.
inline double critical_V_p0(double Gamma) { return -0.5 * Gamma; }

std::vector<BoundaryRow> analytic_boundaries(const Axis& v_axis, double Gamma);

enum class Direction { kUp, kDown, kBoth };
Direction parse_direction(const std::string& s);
std::string to_string(Direction d);

struct HysteresisSpec {
  ModelParams base;           // V, g, Gamma (and N for quantum) taken from here
  std::vector<double> p_values;  // ascending
  Direction direction = Direction::kBoth;
  SolverSpec::Kind solver = SolverSpec::Kind::kMeanField;
  int N = 0;
  double settle_time = 200.0;  // mean-field continuation
  double window = 20.0;        // quantum ramp window per p value
  double threshold = 0.05;     // |Z_up - Z_down| marking bistability
  BlochVector initial = kSouthPole;

  void validate() const;
};

struct BranchPoint {
  double p = 0.0;
  BlochVector state;
  bool converged = true;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
  double width() const { return hi - lo; }
};

struct HysteresisResult {
  std::vector<double> p_values;
  std::vector<BranchPoint> up;    // aligned with p_values (ascending)
  std::vector<BranchPoint> down;  // aligned with p_values (ascending)
  std::vector<Interval> bistable_runs;  // maximal runs with |dZ| > threshold
  std::optional<Interval> bistable;     // hull of the runs
};

/// Sweeps p upward and/or downward, following the branch with mean-field
/// continuation or a finite-N density-matrix ramp.
HysteresisResult hysteresis_experiment(const HysteresisSpec& spec, int workers = 1);

/// Bistable runs of two aligned branches.
std::vector<Interval> bistable_runs(const std::vector<double>& p, const std::vector<BranchPoint>& up,
                                    const std::vector<BranchPoint>& down, double threshold);

}  // namespace cising::sweep
