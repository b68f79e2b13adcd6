#pragma once

// Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "vortexlens/errors.hpp"

namespace vortexlens {

template <std::size_t N>
using OdeState = std::array<double, N>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  std::size_t max_steps = 2'000'000;
  /// First trial step; 0 selects one automatically.
  double initial_step = 0.0;
  double max_step = std::numeric_limits<double>::infinity();
};

namespace detail {

struct Dopri5Tableau {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

template <std::size_t N>
double error_norm(const OdeState<N>& err, const OdeState<N>& y0, const OdeState<N>& y1,
                  const OdeOptions& opt) {
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sc = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(N));
}

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 to t1 (either direction) and returns y(t1).
/// `observe(t, y)` is called after every accepted step, including the last
/// one which lands exactly on t1.
template <std::size_t N, class Rhs, class Observer>
OdeState<N> integrate_adaptive(Rhs&& rhs, OdeState<N> y, double t0, double t1,
                               const OdeOptions& opt, Observer&& observe) {
  using T = detail::Dopri5Tableau;
  if (t1 == t0) return y;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);

  OdeState<N> k1 = rhs(t0, y);
  double h = opt.initial_step > 0.0 ? opt.initial_step : 0.0;
  if (h == 0.0) {
    double ny = 0.0, nf = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(y[i]);
      ny += (y[i] / sc) * (y[i] / sc);
      nf += (k1[i] / sc) * (k1[i] / sc);
    }
    ny = std::sqrt(ny / N);
    nf = std::sqrt(nf / N);
    h = (ny < 1e-5 || nf < 1e-5) ? 1e-6 * span : 0.01 * ny / nf;
    // Fifth-order method: scale the heuristic down for tight tolerances.
    h *= 0.1;
  }
  h = std::min({h, span, opt.max_step});

  double t = t0;
  std::size_t steps = 0;
  bool last = false;
  while (!last) {
    if (++steps > opt.max_steps) {
      throw SolverError("integrate_adaptive: exceeded max_steps = " +
                        std::to_string(opt.max_steps));
    }
    double remaining = std::abs(t1 - t);
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    const double hs = dir * h;
    OdeState<N> tmp, k2, k3, k4, k5, k6, k7, y1, err;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * T::a21 * k1[i];
    k2 = rhs(t + T::c2 * hs, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (T::a31 * k1[i] + T::a32 * k2[i]);
    k3 = rhs(t + T::c3 * hs, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (T::a41 * k1[i] + T::a42 * k2[i] + T::a43 * k3[i]);
    k4 = rhs(t + T::c4 * hs, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (T::a51 * k1[i] + T::a52 * k2[i] + T::a53 * k3[i] + T::a54 * k4[i]);
    k5 = rhs(t + T::c5 * hs, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (T::a61 * k1[i] + T::a62 * k2[i] + T::a63 * k3[i] +
                            T::a64 * k4[i] + T::a65 * k5[i]);
    const double t_new = last ? t1 : t + hs;
    k6 = rhs(t + hs, tmp);
    for (std::size_t i = 0; i < N; ++i)
      y1[i] = y[i] + hs * (T::b1 * k1[i] + T::b3 * k3[i] + T::b4 * k4[i] + T::b5 * k5[i] +
                           T::b6 * k6[i]);
    k7 = rhs(t_new, y1);
    for (std::size_t i = 0; i < N; ++i)
      err[i] = hs * (T::e1 * k1[i] + T::e3 * k3[i] + T::e4 * k4[i] + T::e5 * k5[i] +
                     T::e6 * k6[i] + T::e7 * k7[i]);

    const double en = detail::error_norm(err, y, y1, opt);
    if (!std::isfinite(en)) {
      throw SolverError("integrate_adaptive: non-finite state");
    }
    if (en <= 1.0) {
      t = t_new;
      y = y1;
      k1 = k7;
      observe(t, y);
      const double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
      h = std::min({h * std::clamp(fac, 0.2, 5.0), opt.max_step});
    } else {
      last = false;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        throw SolverError("integrate_adaptive: step size underflow");
      }
    }
  }
  return y;
}

template <std::size_t N, class Rhs>
OdeState<N> integrate_adaptive(Rhs&& rhs, OdeState<N> y, double t0, double t1,
                               const OdeOptions& opt = {}) {
  return integrate_adaptive(std::forward<Rhs>(rhs), y, t0, t1, opt,
                            [](double, const OdeState<N>&) {});
}

}  // namespace vortexlens
