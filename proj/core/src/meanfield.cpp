#include "cising/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/QR>

#include "cising/error.hpp"

namespace cising::mf {

double FixedPoint::max_real_part() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& ev : jacobian_eigenvalues) m = std::max(m, ev.real());
  return m;
}

Eigen::Vector3d bloch_rhs(const BlochVector& s, const ModelParams& prm) {
  const double X = s.X, Y = s.Y, Z = s.Z;
  const double V = prm.V, g = prm.g, G = prm.Gamma, p = prm.p, q = 1.0 - p;
  return {
      -p * 0.5 * V * Y * Z - q * g * Y + G / 8.0 * X * Z,
      p * (0.5 * V * X * Z - g * Z) + q * (g * X - 0.5 * V * X * Z) + G / 8.0 * Y * Z,
      p * g * Y + q * 0.5 * V * X * Y - G / 8.0 * (1.0 - Z * Z),
  };
}

Eigen::Matrix3d jacobian(const BlochVector& s, const ModelParams& prm) {
  const double X = s.X, Y = s.Y, Z = s.Z;
  const double V = prm.V, g = prm.g, G = prm.Gamma, p = prm.p;
  Eigen::Matrix3d m;
  m(0, 0) = G * Z / 8.0;
  m(0, 1) = (p - 1.0) * g - 0.5 * p * V * Z;
  m(0, 2) = -0.5 * p * V * Y + G * X / 8.0;
  m(1, 0) = 0.5 * (2.0 * p - 1.0) * V * Z + (1.0 - p) * g;
  m(1, 1) = G * Z / 8.0;
  m(1, 2) = 0.5 * (2.0 * p - 1.0) * V * X - p * g + G * Y / 8.0;
  m(2, 0) = 0.5 * (1.0 - p) * V * Y;
  m(2, 1) = p * g + 0.5 * (1.0 - p) * V * X;
  m(2, 2) = G * Z / 4.0;
  return m;
}

std::optional<BlochVector> analytic_p1(const ModelParams& prm) {
  prm.validate();
  if (prm.p != 1.0) throw InvalidArgument("analytic_p1 requires p == 1");
  const double denom = 16.0 * prm.V * prm.V + prm.Gamma * prm.Gamma;
  const double radicand = 1.0 - 64.0 * prm.g * prm.g / denom;
  // A few ulps below zero is the boundary itself.
  if (radicand < -8.0 * std::numeric_limits<double>::epsilon()) return std::nullopt;
  return BlochVector{32.0 * prm.g * prm.V / denom, 8.0 * prm.g * prm.Gamma / denom,
                     -std::sqrt(std::max(radicand, 0.0))};
}

std::string BranchCandidate::label() const {
  if (xi_sign == 0) return state.Z > 0 ? "PM+" : "PM-";
  std::string out = "(";
  out += xi_sign > 0 ? '+' : '-';
  out += ',';
  out += eta_sign > 0 ? '+' : '-';
  out += ')';
  return out;
}

std::optional<std::array<double, 2>> xi_roots(double V, double Gamma) {
  const double disc = 4.0 * V * V - Gamma * Gamma;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  const double g2 = Gamma * Gamma;
  return std::array<double, 2>{(2.0 * V + root) / g2, (2.0 * V - root) / g2};
}

std::vector<BranchCandidate> analytic_p0(const ModelParams& prm) {
  prm.validate();
  if (prm.p != 0.0) throw InvalidArgument("analytic_p0 requires p == 0");
  std::vector<BranchCandidate> out;
  if (const auto xis = xi_roots(prm.V, prm.Gamma)) {
    for (int b = 0; b < 2; ++b) {
      const double xi = (*xis)[static_cast<std::size_t>(b)];
      const double radicand = 1.0 - (64.0 * prm.g * prm.g + prm.Gamma * prm.Gamma) * xi / (4.0 * prm.V);
      if (radicand < 0.0) continue;
      const double eta = std::sqrt(radicand);
      for (int sign : {+1, -1}) {
        if (eta == 0.0 && sign < 0) break;
        const double e = sign * eta;
        out.push_back({BlochVector{e, prm.Gamma * e * xi, 8.0 * prm.g * xi}, b == 0 ? +1 : -1, sign});
      }
    }
  }
  out.push_back({kSouthPole, 0, 0});
  out.push_back({kNorthPole, 0, 0});
  return out;
}

FixedPoint classify_stability(const BlochVector& state, const ModelParams& params) {
  const double residual = bloch_rhs(state, params).cwiseAbs().maxCoeff();
  if (!(residual < kRootTolerance))
    throw NotAFixedPoint("classify_stability: residual " + std::to_string(residual) +
                             " exceeds the root tolerance",
                         residual);
  Eigen::EigenSolver<Eigen::Matrix3d> es(jacobian(state, params), false);
  FixedPoint fp;
  fp.state = state;
  fp.residual = residual;
  for (int i = 0; i < 3; ++i) fp.jacobian_eigenvalues[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
  std::sort(fp.jacobian_eigenvalues.begin(), fp.jacobian_eigenvalues.end(),
            [](const auto& a, const auto& b) {
              return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
            });
  const double top = fp.max_real_part();
  if (top < -kStabilityTolerance)
    fp.stability = Stability::kStable;
  else if (top <= kStabilityTolerance)
    fp.stability = Stability::kMarginal;
  else
    fp.stability = Stability::kUnstable;
  return fp;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double residual_norm(const Eigen::Vector3d& x, const ModelParams& params) {
  return bloch_rhs(BlochVector::from(x), params).cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<BlochVector> sphere_seeds(int n_seeds, std::uint64_t rng_seed) {
  if (n_seeds < 1) throw InvalidArgument("sphere_seeds: n_seeds must be >= 1");
  std::mt19937_64 rng(rng_seed);
  // Shoemake's uniform random rotation.
  const double u1 = unit_uniform(rng), u2 = unit_uniform(rng), u3 = unit_uniform(rng);
  const double two_pi = 2.0 * std::numbers::pi;
  const Eigen::Quaterniond q(std::sqrt(u1) * std::cos(two_pi * u3), std::sqrt(1.0 - u1) * std::sin(two_pi * u2),
                             std::sqrt(1.0 - u1) * std::cos(two_pi * u2), std::sqrt(u1) * std::sin(two_pi * u3));
  const Eigen::Matrix3d rot = q.normalized().toRotationMatrix();

  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<BlochVector> seeds;
  seeds.reserve(static_cast<std::size_t>(n_seeds));
  for (int i = 0; i < n_seeds; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n_seeds;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    const Eigen::Vector3d v = rot * Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z);
    seeds.push_back(BlochVector::from(v.normalized()));
  }
  return seeds;
}

std::optional<BlochVector> newton_root(const BlochVector& seed, const ModelParams& params, int max_iterations) {
  Eigen::Vector3d x = seed.vec();
  double fnorm = residual_norm(x, params);
  int polish = 0;
  for (int it = 0; it < max_iterations; ++it) {
    if (fnorm < kRootTolerance) {
      // A couple of extra full steps drive the residual to rounding level.
      if (fnorm < 1e-15 || polish >= 3) break;
      ++polish;
    }
    const Eigen::Vector3d f = bloch_rhs(BlochVector::from(x), params);
    const Eigen::Matrix3d J = jacobian(BlochVector::from(x), params);
    const Eigen::Vector3d step = J.completeOrthogonalDecomposition().solve(-f);
    if (!step.allFinite()) return std::nullopt;

    double t = 1.0;
    Eigen::Vector3d trial = x + step;
    double trial_norm = residual_norm(trial, params);
    while (!(trial_norm < (1.0 - 1e-4 * t) * fnorm) && t > 1.0 / 1024.0) {
      t *= 0.5;
      trial = x + t * step;
      trial_norm = residual_norm(trial, params);
    }
    if (!(trial_norm < fnorm)) break;  // stalled
    x = trial;
    fnorm = trial_norm;
    if (x.norm() > 10.0) return std::nullopt;
  }
  if (!(fnorm < kRootTolerance)) return std::nullopt;
  if (std::abs(x.norm() - 1.0) > kSphereTolerance) return std::nullopt;
  return BlochVector::from(x);
}

std::vector<FixedPoint> find_fixed_points(const ModelParams& params, const SearchOptions& opt) {
  params.validate();
  if (opt.n_seeds < 1) throw InvalidArgument("find_fixed_points: n_seeds must be >= 1");
  std::vector<FixedPoint> out;
  for (const auto& seed : sphere_seeds(opt.n_seeds, opt.rng_seed)) {
    const auto root = newton_root(seed, params, opt.max_newton_iterations);
    if (!root) continue;
    const Eigen::Vector3d r = root->vec();
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const FixedPoint& fp) {
      return (fp.state.vec() - r).norm() < kDedupDistance;
    });
    if (duplicate) continue;
    try {
      out.push_back(classify_stability(*root, params));
    } catch (const NotAFixedPoint&) {
    }
  }
  return out;
}

std::vector<FixedPoint> stable_only(const std::vector<FixedPoint>& points) {
  std::vector<FixedPoint> out;
  std::copy_if(points.begin(), points.end(), std::back_inserter(out), [](const FixedPoint& f) { return f.stable(); });
  return out;
}

}  // namespace cising::mf
