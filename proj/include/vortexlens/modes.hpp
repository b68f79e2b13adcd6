#pragma once

// Generalised Laguerre-Gaussian modes riding on an envelope w(z):
//
//   chi_{n,l} = (N/w) (rho/w)^|l| L_n^|l|(2 rho^2/w^2)
//               exp(-rho^2/w^2 + i k rho^2 w'/(2w)) exp(i l phi - i theta(z))
//
// with theta = (2n+|l|+1) * int 2/(k w^2) dz + l * int Omega/v dz.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "vortexlens/errors.hpp"
#include "vortexlens/lensing.hpp"
#include "vortexlens/quadrature.hpp"

namespace vortexlens {

using cplx = std::complex<double>;

/// r e^{i phase}; unlike std::polar, r may be negative.
inline cplx phasor(double r, double phase) {
  return {r * std::cos(phase), r * std::sin(phase)};
}

inline constexpr int kMaxRadialIndex = 64;

struct QuantumNumbers {
  int n = 0;  // radial index
  int l = 0;  // vorticity

  void validate() const {
    if (n < 0 || n > kMaxRadialIndex) {
      throw std::invalid_argument("radial index n must lie in [0, " +
                                  std::to_string(kMaxRadialIndex) + "], got " +
                                  std::to_string(n));
    }
  }
  int abs_l() const noexcept { return l < 0 ? -l : l; }
  /// Eigenvalue of the Ermakov-Lewis invariant in units of hbar.
  int invariant_eigenvalue() const noexcept { return 2 * n + abs_l() + 1; }
  friend bool operator==(const QuantumNumbers&, const QuantumNumbers&) = default;
};

/// L_n^alpha(x) by the three-term recurrence in n.
inline double assoc_laguerre(int n, int alpha, double x) {
  if (n < 0 || alpha < 0) throw std::invalid_argument("assoc_laguerre: need n, alpha >= 0");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + alpha - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// L_0^alpha(x) .. L_nmax^alpha(x) in one sweep.
inline std::vector<double> assoc_laguerre_all(int nmax, int alpha, double x) {
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1);
  out[0] = 1.0;
  if (nmax >= 1) out[1] = 1.0 + alpha - x;
  for (int k = 1; k < nmax; ++k) {
    out[k + 1] = ((2.0 * k + 1.0 + alpha - x) * out[k] - (k + alpha) * out[k - 1]) / (k + 1.0);
  }
  return out;
}

/// N = sqrt(2^(|l|+1)/pi * n!/(n+|l|)!), which makes int |chi|^2 dA = 1.
inline double normalization(const QuantumNumbers& qn) {
  qn.validate();
  const int al = qn.abs_l();
  double ratio = 1.0;  // n! / (n+|l|)!
  for (int j = 1; j <= al; ++j) ratio /= static_cast<double>(qn.n + j);
  return std::sqrt(std::ldexp(1.0, al + 1) / std::numbers::pi * ratio);
}

struct ModeSpec {
  QuantumNumbers qn;
  EnvelopeSolution envelope;
  /// Plane at which theta(z) = 0.
  double z_ref = 0.0;
};

struct PhaseParts {
  double gouy;      // rad, proportional to 2n+|l|+1
  double rotation;  // rad, proportional to l
  double total;
};

inline PhaseParts phase_theta(const ModeSpec& m, double z) {
  const auto& env = m.envelope;
  const double g = m.qn.invariant_eigenvalue() * env.gouy_integral(m.z_ref, z);
  const double r = m.qn.l * env.field().omega_integral(m.z_ref, z) / env.beam().speed();
  return {g, r, g + r};
}

/// A mode frozen at one transverse plane.  Cheap to evaluate repeatedly.
class ModeSlice {
 public:
  ModeSlice(const ModeSpec& m, double z)
      : qn_(m.qn), z_(z), norm_(normalization(m.qn)), k_(m.envelope.beam().wavenumber()) {
    const EnvelopeSample s = m.envelope.at(z);
    w_ = s.w;
    dw_ = s.dw;
    ddw_ = m.envelope.second_derivative(z);
    const double v = m.envelope.beam().speed();
    omega_ = m.envelope.field().omega(z);
    theta_ = phase_theta(m, z).total;
    dtheta_ = qn_.invariant_eigenvalue() * 2.0 / (k_ * w_ * w_) + qn_.l * omega_ / v;
  }

  const QuantumNumbers& qn() const noexcept { return qn_; }
  double z() const noexcept { return z_; }
  double width() const noexcept { return w_; }
  double slope() const noexcept { return dw_; }
  double theta() const noexcept { return theta_; }
  double omega() const noexcept { return omega_; }

  cplx operator()(double rho, double phi) const {
    double amp, phase;
    radial(rho, amp, phase);
    return phasor(amp, phase + qn_.l * phi);
  }

  /// d chi / dz at fixed (rho, phi), using w'' from the lensing equation.
  cplx dz(double rho, double phi) const {
    const int al = qn_.abs_l();
    const double rw = rho / w_;
    const double x = 2.0 * rw * rw;
    const double lag = assoc_laguerre(qn_.n, al, x);
    const double dlag = qn_.n > 0 ? -assoc_laguerre(qn_.n - 1, al + 1, x) : 0.0;
    const double pre = norm_ / w_ * std::pow(rw, al) * std::exp(-rw * rw);
    const double phase = k_ * rho * rho * dw_ / (2.0 * w_) + qn_.l * phi - theta_;
    const cplx a(-(1.0 + al) * dw_ / w_ + 2.0 * rho * rho * dw_ / (w_ * w_ * w_),
                 k_ * rho * rho * (w_ * ddw_ - dw_ * dw_) / (2.0 * w_ * w_) - dtheta_);
    const double dx = -2.0 * x * dw_ / w_;
    return phasor(pre, phase) * (lag * a + dlag * dx);
  }

 private:
  void radial(double rho, double& amp, double& phase) const {
    const double rw = rho / w_;
    const double lag = assoc_laguerre(qn_.n, qn_.abs_l(), 2.0 * rw * rw);
    amp = norm_ / w_ * std::pow(rw, qn_.abs_l()) * lag * std::exp(-rw * rw);
    phase = k_ * rho * rho * dw_ / (2.0 * w_) - theta_;
  }

  QuantumNumbers qn_;
  double z_;
  double norm_;
  double k_;
  double w_ = 0, dw_ = 0, ddw_ = 0, omega_ = 0, theta_ = 0, dtheta_ = 0;
};

inline ModeSlice mode_slice(const ModeSpec& m, double z) { return ModeSlice(m, z); }

inline cplx evaluate_mode(const ModeSpec& m, double rho, double phi, double z) {
  if (!(rho >= 0.0)) throw std::invalid_argument("evaluate_mode: rho must be >= 0");
  return ModeSlice(m, z)(rho, phi);
}

struct SuperpositionTerm {
  cplx coefficient;
  ModeSpec mode;
};

/// Linear combination of modes.  Coefficients are used as given.
struct Superposition {
  std::vector<SuperpositionTerm> terms;

  double coefficient_norm2() const {
    double s = 0.0;
    for (const auto& t : terms) s += std::norm(t.coefficient);
    return s;
  }
};

class SuperpositionSlice {
 public:
  SuperpositionSlice(const Superposition& s, double z) {
    for (const auto& t : s.terms) parts_.emplace_back(t.coefficient, ModeSlice(t.mode, z));
  }
  explicit SuperpositionSlice(const ModeSlice& m) { parts_.emplace_back(1.0, m); }

  cplx operator()(double rho, double phi) const {
    cplx acc = 0.0;
    for (const auto& [c, m] : parts_) acc += c * m(rho, phi);
    return acc;
  }
  cplx dz(double rho, double phi) const {
    cplx acc = 0.0;
    for (const auto& [c, m] : parts_) acc += c * m.dz(rho, phi);
    return acc;
  }
  /// Largest envelope width among the terms.
  double max_width() const {
    double w = 0.0;
    for (const auto& p : parts_) w = std::max(w, p.second.width());
    return w;
  }
  int max_radial_order() const {
    int o = 0;
    for (const auto& p : parts_) o = std::max(o, p.second.qn().n + p.second.qn().abs_l());
    return o;
  }

 private:
  std::vector<std::pair<cplx, ModeSlice>> parts_;
};

/// Cartesian sampling grid.
struct Grid2D {
  double x_min, x_max;
  std::size_t nx;
  double y_min, y_max;
  std::size_t ny;

  double x(std::size_t i) const {
    return nx == 1 ? x_min : x_min + (x_max - x_min) * static_cast<double>(i) / (nx - 1.0);
  }
  double y(std::size_t j) const {
    return ny == 1 ? y_min : y_min + (y_max - y_min) * static_cast<double>(j) / (ny - 1.0);
  }
  std::size_t size() const noexcept { return nx * ny; }
  friend bool operator==(const Grid2D&, const Grid2D&) = default;

  static Grid2D square(double half_extent, std::size_t n) {
    return {-half_extent, half_extent, n, -half_extent, half_extent, n};
  }
};

/// Samples a (rho, phi) field on a Cartesian grid, x-major row order.
template <class Field>
std::vector<cplx> sample_on_grid(const Field& f, const Grid2D& g) {
  std::vector<cplx> out;
  out.reserve(g.size());
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double x = g.x(i), y = g.y(j);
      out.push_back(f(std::hypot(x, y), std::atan2(y, x)));
    }
  }
  return out;
}

/// Pointwise chi * conj(chi_ref).
inline std::vector<cplx> interference_term(std::span<const cplx> field, std::span<const cplx> ref) {
  if (field.size() != ref.size()) {
    throw GridMismatch("interference_term: grids differ in size (" +
                       std::to_string(field.size()) + " vs " + std::to_string(ref.size()) + ")");
  }
  std::vector<cplx> out(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = field[i] * std::conj(ref[i]);
  return out;
}

template <class FieldA, class FieldB>
std::vector<cplx> interference_term(const FieldA& field, const FieldB& ref, const Grid2D& grid) {
  const auto a = sample_on_grid(field, grid);
  const auto b = sample_on_grid(ref, grid);
  return interference_term(std::span<const cplx>(a), std::span<const cplx>(b));
}

/// <a|b> = int conj(a) b dA over the disc rho < rho_max: adaptive Gauss-Kronrod
/// in rho, M-point trapezoid in phi.
template <class FieldA, class FieldB>
cplx inner_product(const FieldA& a, const FieldB& b, double rho_max, std::size_t m = 64,
                   double rtol = 1e-12) {
  auto radial = [&](double rho) {
    return periodic_trapezoid([&](double phi) { return std::conj(a(rho, phi)) * b(rho, phi); }, m) *
           rho;
  };
  QuadratureOptions opt;
  opt.rtol = rtol;
  opt.atol = 1e-15;
  return integrate_or_throw(radial, 0.0, rho_max, opt);
}

/// Truncation radius used for radial integrals of a mode of order n+|l|.
inline double radial_cutoff(double w, int order) { return 12.0 * w * std::sqrt(order + 1.0); }

inline double mode_norm(const ModeSpec& m, double z) {
  const ModeSlice s(m, z);
  const double rmax = radial_cutoff(s.width(), m.qn.n + m.qn.abs_l());
  QuadratureOptions opt;
  opt.rtol = 1e-13;
  const double rad = integrate_or_throw(
      [&](double rho) { return std::norm(s(rho, 0.0)) * rho; }, 0.0, rmax, opt);
  return 2.0 * std::numbers::pi * rad;
}

}  // namespace vortexlens
