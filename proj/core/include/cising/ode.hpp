#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include <Eigen/Core>

#include "cising/error.hpp"

namespace cising::ode {

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  // 0 selects a step automatically
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 50'000'000;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  double t_final = 0.0;
  bool stopped_early = false;
};

namespace detail {

// Max-norm of err scaled componentwise by atol + rtol * max(|y0|, |y1|).
template <class State>
double scaled_max_norm(const State& err, const State& y0, const State& y1,
                       double atol, double rtol) {
  const auto scale = (y0.cwiseAbs().array().max(y1.cwiseAbs().array()) * rtol + atol).eval();
  return (err.cwiseAbs().array() / scale).maxCoeff();
}

template <class State>
double max_abs(const State& s) {
  return s.size() == 0 ? 0.0 : s.cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of y' = f(t, y) from t0 to t1.
///
/// `rhs(t, y, dydt)` writes the derivative into dydt. `observer(t, y)` is
/// called at t0 and after every accepted step; returning false stops the
/// integration at that point. Works for any Eigen dense vector or matrix
/// state, real or complex.
template <class State, class Rhs, class Observer>
State integrate(Rhs&& rhs, State y, double t0, double t1, const Options& opt,
                Observer&& observer, Stats* stats = nullptr) {
  // Butcher tableau, FSAL.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                   a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                   a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (!(t1 > t0)) throw InvalidArgument("ode::integrate: t_end must exceed t_start");
  if (!(opt.rel_tol > 0.0) || !(opt.abs_tol > 0.0))
    throw InvalidArgument("ode::integrate: tolerances must be positive");

  Stats local;
  Stats& st = stats ? *stats : local;
  st = Stats{};

  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ytmp = y, ynew = y;
  double t = t0;
  rhs(t, y, k1);
  ++st.rhs_evaluations;
  if (!observer(t, static_cast<const State&>(y))) {
    st.t_final = t;
    st.stopped_early = true;
    return y;
  }

  double h = opt.initial_step;
  if (h <= 0.0) {
    // Crude first guess; the controller adapts within a few steps.
    const double d0 = detail::max_abs(y), d1 = detail::max_abs(k1);
    h = std::clamp(0.01 * (d0 + opt.abs_tol) / std::max(d1, 1e-300), 1e-12 * (t1 - t0),
                   1e-2 * (t1 - t0));
  }
  h = std::min({h, opt.max_step, t1 - t0});

  const double h_floor = 16.0 * std::numeric_limits<double>::epsilon();
  double err_prev = 1e-4;
  while (t < t1) {
    if (st.accepted + st.rejected >= opt.max_steps)
      throw IntegrationError("ode::integrate: step budget exhausted at t=" + std::to_string(t));
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }
    if (h <= h_floor * std::max(1.0, std::abs(t)))
      throw IntegrationError("ode::integrate: step size underflow at t=" + std::to_string(t) +
                             " (problem too stiff for an explicit scheme)");

    ytmp = y + h * a21 * k1;
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs(t + h, ynew, k7);
    st.rhs_evaluations += 6;

    ytmp = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err = detail::scaled_max_norm(ytmp, y, ynew, opt.abs_tol, opt.rel_tol);

    if (err <= 1.0 && std::isfinite(err)) {
      t = last ? t1 : t + h;
      std::swap(y, ynew);
      std::swap(k1, k7);
      ++st.accepted;
      if (!observer(t, static_cast<const State&>(y))) {
        st.stopped_early = true;
        break;
      }
      // PI step control.
      const double e = std::max(err, 1e-10);
      double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      fac = std::clamp(fac, 0.2, 5.0);
      err_prev = std::max(err, 1e-4);
      h = std::min(h * fac, opt.max_step);
    } else {
      ++st.rejected;
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.1;
      h *= fac;
    }
  }
  st.t_final = t;
  return y;
}

template <class State, class Rhs>
State integrate(Rhs&& rhs, State y, double t0, double t1, const Options& opt,
                Stats* stats = nullptr) {
  return integrate(std::forward<Rhs>(rhs), std::move(y), t0, t1, opt,
                   [](double, const State&) { return true; }, stats);
}

}  // namespace cising::ode
