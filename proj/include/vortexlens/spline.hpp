#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortexlens/errors.hpp"

namespace vortexlens {

/// Natural cubic spline (zero second derivative at both ends).
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n != y_.size()) throw std::invalid_argument("spline: x and y sizes differ");
    if (n < 4) throw std::invalid_argument("spline: need at least 4 samples");
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!(x_[i + 1] > x_[i])) {
        throw std::invalid_argument("spline: samples must be strictly increasing (index " +
                                    std::to_string(i + 1) + ")");
      }
    }
    // Thomas algorithm for the interior second derivatives.
    m_.assign(n, 0.0);
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double lower = x_[i] - x_[i - 1];
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
      if (i == 1) break;
    }
  }

  double front() const noexcept { return x_.front(); }
  double back() const noexcept { return x_.back(); }
  std::span<const double> knots() const noexcept { return x_; }
  std::span<const double> values() const noexcept { return y_; }

  double value(double x) const {
    const auto [i, t, h] = locate(x);
    const double a = 1.0 - t;
    return a * y_[i] + t * y_[i + 1] +
           h * h / 6.0 * ((a * a * a - a) * m_[i] + (t * t * t - t) * m_[i + 1]);
  }

  double derivative(double x) const {
    const auto [i, t, h] = locate(x);
    const double a = 1.0 - t;
    return (y_[i + 1] - y_[i]) / h +
           h / 6.0 * (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * t * t - 1.0) * m_[i + 1]);
  }

  /// Exact integral of the interpolant over [a, b].
  double integral(double a, double b) const {
    if (a == b) return 0.0;
    if (a > b) return -integral(b, a);
    check(a);
    check(b);
    double acc = 0.0;
    std::size_t i = segment(a);
    double lo = a;
    while (true) {
      const double hi = std::min(b, x_[i + 1]);
      acc += antiderivative(i, hi) - antiderivative(i, lo);
      if (hi >= b || i + 2 >= x_.size()) break;
      lo = hi;
      ++i;
    }
    return acc;
  }

 private:
  struct Loc {
    std::size_t i;
    double t;
    double h;
  };

  void check(double x) const {
    if (!(x >= x_.front() && x <= x_.back())) {
      throw OutOfDomain("tabulated profile: z = " + std::to_string(x) +
                        " outside sample range [" + std::to_string(x_.front()) + ", " +
                        std::to_string(x_.back()) + "]");
    }
  }

  std::size_t segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
  }

  Loc locate(double x) const {
    check(x);
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    return {i, (x - x_[i]) / h, h};
  }

  // Antiderivative on segment i, zero at x_[i].
  double antiderivative(std::size_t i, double x) const {
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double a = 1.0 - t;
    // d/dx of (-(a^2) h / 2) = a, etc.
    const double lin = h * (y_[i] * (0.5 - 0.5 * a * a) + y_[i + 1] * 0.5 * t * t);
    const double cub_i = -h * h * h / 6.0 * ((a * a * a * a) / 4.0 - (a * a) / 2.0 + 0.25);
    const double cub_j = h * h * h / 6.0 * ((t * t * t * t) / 4.0 - (t * t) / 2.0);
    return lin + cub_i * m_[i] + cub_j * m_[i + 1];
  }

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;
};

}  // namespace vortexlens
