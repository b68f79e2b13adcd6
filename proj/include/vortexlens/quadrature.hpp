#pragma once

// Globally adaptive 15-point Gauss-Kronrod quadrature.
//
// The integrand may return any value type closed under `+` and scaling by a
// double for which `magnitude()` is defined: double, std::complex<double>,
// std::valarray of either, or std::array<double, N>.  Vector-valued integrands
// share one set of subdivisions and the error is controlled in max-norm.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <queue>
#include <valarray>
#include <vector>

#include "vortexlens/errors.hpp"

namespace vortexlens {

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& x) { return std::abs(x); }
template <class T>
double magnitude(const std::valarray<T>& x) {
  double m = 0.0;
  for (const auto& e : x) m = std::max(m, magnitude(e));
  return m;
}
template <std::size_t N>
double magnitude(const std::array<double, N>& x) {
  double m = 0.0;
  for (double e : x) m = std::max(m, std::abs(e));
  return m;
}

template <std::size_t N>
std::array<double, N> operator+(const std::array<double, N>& a, const std::array<double, N>& b) {
  std::array<double, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
  return r;
}
template <std::size_t N>
std::array<double, N> operator-(const std::array<double, N>& a, const std::array<double, N>& b) {
  std::array<double, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
  return r;
}
template <std::size_t N>
std::array<double, N> operator*(const std::array<double, N>& a, double s) {
  std::array<double, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] * s;
  return r;
}

struct QuadratureOptions {
  double rtol = 1e-11;
  double atol = 0.0;
  std::size_t max_intervals = 4000;
};

template <class V>
struct QuadratureResult {
  V value;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
inline constexpr std::array<double, 8> kGk15Nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kGk15Weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGauss7Weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class V>
struct Panel {
  double a, b;
  V value;
  double error;
};

template <class V, class F>
Panel<V> gk15_panel(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const V fc = f(c);
  V kron = fc * kGk15Weights[7];
  V gauss = fc * kGauss7Weights[3];
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = h * kGk15Nodes[i];
    const V fsum = f(c - dx) + f(c + dx);
    kron = kron + fsum * kGk15Weights[i];
    if (i % 2 == 1) gauss = gauss + fsum * kGauss7Weights[i / 2];
  }
  kron = kron * h;
  gauss = gauss * h;
  const V diff = kron + gauss * -1.0;
  return {a, b, kron, magnitude(diff)};
}

}  // namespace detail

/// Single non-adaptive GK15 panel; returns (Kronrod value, |Kronrod - Gauss|).
template <class F>
auto gauss_kronrod15(F&& f, double a, double b) {
  using V = decltype(f(a));
  auto p = detail::gk15_panel<V>(f, a, b);
  return std::pair{p.value, p.error};
}

/// Integrates f over the partition given by `breaks` (sorted, at least two
/// points), bisecting the panel with the largest error estimate until the
/// summed error is below max(atol, rtol * |integral|).
template <class F>
auto integrate_adaptive_gk(F&& f, const std::vector<double>& breaks,
                           const QuadratureOptions& opt = {}) {
  using V = decltype(f(0.5 * (breaks.front() + breaks.back())));
  using P = detail::Panel<V>;
  if (breaks.size() < 2) {
    throw std::invalid_argument("integrate_adaptive_gk: need at least two break points");
  }
  auto cmp = [](const P& x, const P& y) { return x.error < y.error; };
  std::priority_queue<P, std::vector<P>, decltype(cmp)> heap(cmp);
  QuadratureResult<V> result{};
  std::size_t panels = 0;
  bool have_total = false;
  V total{};
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] == breaks[i]) continue;
    P p = detail::gk15_panel<V>(f, breaks[i], breaks[i + 1]);
    total = have_total ? total + p.value : p.value;
    have_total = true;
    total_err += p.error;
    heap.push(std::move(p));
    ++panels;
  }
  if (!have_total) {
    P p = detail::gk15_panel<V>(f, breaks.front(), breaks.front());
    result.value = p.value;
    result.converged = true;
    return result;
  }
  result.evaluations = 15 * panels;
  while (true) {
    const double target = std::max(opt.atol, opt.rtol * magnitude(total));
    if (total_err <= target) {
      result.converged = true;
      break;
    }
    if (panels >= opt.max_intervals) break;
    P worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) {
      heap.push(std::move(worst));
      break;
    }
    P left = detail::gk15_panel<V>(f, worst.a, mid);
    P right = detail::gk15_panel<V>(f, mid, worst.b);
    total = total + (left.value + right.value + worst.value * -1.0);
    total_err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++panels;
    result.evaluations += 30;
  }
  // Re-sum from the panels to shed accumulated update round-off.
  V sum = heap.top().value;
  double esum = heap.top().error;
  heap.pop();
  while (!heap.empty()) {
    sum = sum + heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  result.value = sum;
  result.error = esum;
  if (!result.converged) {
    result.converged = esum <= std::max(opt.atol, opt.rtol * magnitude(sum));
  }
  return result;
}

template <class F>
auto integrate_adaptive_gk(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  return integrate_adaptive_gk(std::forward<F>(f), std::vector<double>{a, b}, opt);
}

/// As integrate_adaptive_gk but throws SolverError on failure.
template <class F>
auto integrate_or_throw(F&& f, const std::vector<double>& breaks,
                        const QuadratureOptions& opt = {}) {
  auto r = integrate_adaptive_gk(std::forward<F>(f), breaks, opt);
  if (!r.converged) {
    throw SolverError("adaptive quadrature did not reach tolerance (error estimate " +
                      std::to_string(r.error) + ")");
  }
  return r.value;
}

template <class F>
auto integrate_or_throw(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  return integrate_or_throw(std::forward<F>(f), std::vector<double>{a, b}, opt);
}

/// Trapezoid rule on [0, 2 pi) with M equispaced nodes; exact for
/// trigonometric polynomials of degree < M.
template <class F>
auto periodic_trapezoid(F&& f, std::size_t m) {
  const double dphi = 2.0 * std::numbers::pi / static_cast<double>(m);
  auto acc = f(0.0);
  for (std::size_t j = 1; j < m; ++j) acc = acc + f(dphi * static_cast<double>(j));
  return acc * dphi;
}

}  // namespace vortexlens
