#pragma once

// Beam-width envelope w(z): solutions of the Ermakov-Pinney ("lensing")
// equation
//
//     4 hbar^2 / (m^2 w^4) - v^2 w''/w = Omega(z)^2
//
// built from two solutions of the linear equation v^2 y'' + Omega^2 y = 0.
// In scaled units (see ScaledUnits) the construction reads
//
//     w^2 = u^2 + v^2 / W^2,   u(z0) = w0, u'(z0) = w0 / R0,
//                              v(z0) = 0,  v'(z0) = 1,  W = u v' - u' v = w0.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "vortexlens/constants.hpp"
#include "vortexlens/errors.hpp"
#include "vortexlens/fields.hpp"
#include "vortexlens/ode.hpp"
#include "vortexlens/quadrature.hpp"

namespace vortexlens {

/// Wavefront radius of curvature with an exact representation of a flat front.
class CurvatureRadius {
 public:
  static CurvatureRadius flat() { return CurvatureRadius(true, 0.0); }
  static CurvatureRadius finite(double r) {
    if (r == 0.0 || std::isnan(r)) {
      throw std::invalid_argument("curvature radius must be nonzero");
    }
    if (std::isinf(r)) return flat();
    return CurvatureRadius(false, r);
  }

  bool is_flat() const noexcept { return flat_; }
  /// +inf for a flat front.
  double value() const noexcept {
    return flat_ ? std::numeric_limits<double>::infinity() : r_;
  }
  /// 1/R, exactly zero for a flat front.
  double inverse() const noexcept { return flat_ ? 0.0 : 1.0 / r_; }
  CurvatureRadius reversed() const { return flat_ ? flat() : finite(-r_); }

 private:
  CurvatureRadius(bool f, double r) : flat_(f), r_(r) {}
  bool flat_;
  double r_;
};

struct EnvelopeInit {
  double z0 = 0.0;
  double w0 = 0.0;
  CurvatureRadius R0 = CurvatureRadius::flat();

  void validate() const {
    if (!(w0 > 0.0) || !std::isfinite(w0)) {
      throw std::invalid_argument("envelope init: w0 must be positive and finite");
    }
    if (!std::isfinite(z0)) throw std::invalid_argument("envelope init: z0 must be finite");
  }
};

enum class EnvelopeBackend { AnalyticConstant, AnalyticFree, AnalyticGlaser, NumericPinney };

inline const char* to_string(EnvelopeBackend b) {
  switch (b) {
    case EnvelopeBackend::AnalyticConstant: return "analytic_constant";
    case EnvelopeBackend::AnalyticFree: return "analytic_free";
    case EnvelopeBackend::AnalyticGlaser: return "analytic_glaser";
    case EnvelopeBackend::NumericPinney: return "numeric_pinney";
  }
  return "unknown";
}

struct SolveOptions {
  /// Force the linear-composition integrator even when a closed form exists.
  bool force_numeric = false;
  /// Tighter than the generic OdeOptions default: the Wronskian of the linear
  /// pair drifts with the integration error, and that drift shows up directly
  /// as a residual of the lensing equation.
  OdeOptions ode{.rtol = 1e-12, .atol = 1e-14};
};

struct EnvelopeSample {
  double w;   // m
  double dw;  // dimensionless dw/dz
};

/// Scaled linear pair (u, u', v, v') in ScaledUnits of the solution.
using PinneyState = OdeState<4>;

namespace detail {

struct Checkpoint {
  double zeta;
  PinneyState state;
  const FieldProfile* profile;  // governs the interval leaving this point
};

struct EnvelopeData {
  FieldProfile field;
  BeamParams beam;
  EnvelopeInit init;
  ZInterval domain;
  ScaledUnits units;
  EnvelopeBackend backend;
  OdeOptions ode;
  // Analytic Glaser basis coefficients: u = ua Yc + ub Ys, v = va Yc + vb Ys.
  double ua = 0, ub = 0, va = 0, vb = 0;
  std::vector<Checkpoint> forward;   // ascending zeta >= 0
  std::vector<Checkpoint> backward;  // descending zeta <= 0

  EnvelopeData(FieldProfile f, BeamParams b, EnvelopeInit i, ZInterval d, EnvelopeBackend be,
               OdeOptions o)
      : field(std::move(f)), beam(b), init(i), domain(d), units(b, i.w0), backend(be), ode(o) {}

  double zeta(double z) const { return (z - init.z0) / units.axial_scale(); }
  double scaled_omega(const FieldProfile& p, double zeta) const {
    return units.to_scaled_omega(p.omega(init.z0 + units.axial_scale() * zeta));
  }
};

// Glaser fundamental pair in scaled variables, x = (z - c)/Z, a = a/Z.
struct GlaserBasis {
  double yc, dyc, ys, dys;
};

inline GlaserBasis glaser_basis(double x, double a, double beta) {
  const double r = std::hypot(a, x);
  const double th = beta * std::atan2(x, a);
  const double c = std::cos(th), s = std::sin(th);
  return {r * c, (x * c - beta * a * s) / r, r * s, (x * s + beta * a * c) / r};
}

inline double glaser_beta(const FieldProfile::GlaserData& g, double speed) {
  const double t = g.a * g.omega0 / speed;
  return std::sqrt(1.0 + t * t);
}

}  // namespace detail

/// Immutable envelope solution; copies share state.
class EnvelopeSolution {
 public:
  EnvelopeBackend backend() const noexcept { return d_->backend; }
  const FieldProfile& field() const noexcept { return d_->field; }
  const BeamParams& beam() const noexcept { return d_->beam; }
  const EnvelopeInit& init() const noexcept { return d_->init; }
  ZInterval domain() const noexcept { return d_->domain; }
  const ScaledUnits& units() const noexcept { return d_->units; }

  /// Scaled linear pair at z.
  PinneyState pinney(double z) const {
    check(z);
    return pinney_scaled(d_->zeta(z));
  }

  EnvelopeSample at(double z) const {
    const PinneyState s = pinney(z);
    const double w0 = d_->units.to_scaled_length(d_->init.w0);
    const double iw2 = 1.0 / (w0 * w0);
    const double w2 = s[0] * s[0] + s[2] * s[2] * iw2;
    const double ww = s[0] * s[1] + s[2] * s[3] * iw2;
    const double w = std::sqrt(w2);
    const double ratio = d_->units.length_scale() / d_->units.axial_scale();
    return {d_->units.from_scaled_length(w), ratio * ww / w};
  }

  double width(double z) const { return at(z).w; }
  double slope(double z) const { return at(z).dw; }

  /// w'' eliminated through the lensing equation (no differencing).
  double second_derivative(double z) const {
    const EnvelopeSample s = at(z);
    const double k = d_->beam.wavenumber();
    const double q = d_->field.omega(z) / d_->beam.speed();
    return 4.0 / (k * k * s.w * s.w * s.w) - q * q * s.w;
  }

  /// Integral of 2/(k w^2) over [z1, z2]: the per-quantum Gouy phase.
  double gouy_integral(double z1, double z2) const {
    check(z1);
    check(z2);
    if (z1 == z2) return 0.0;
    if (d_->backend == EnvelopeBackend::NumericPinney) {
      return gouy_by_quadrature(z1, z2, 1e-11);
    }
    return gouy_by_angle(z1, z2);
  }

  /// Same integral via adaptive quadrature of 1/w^2 regardless of backend.
  double gouy_by_quadrature(double z1, double z2, double rtol) const {
    const double a = d_->zeta(z1), b = d_->zeta(z2);
    const double lo = std::min(a, b), hi = std::max(a, b);
    std::vector<double> breaks{lo};
    auto add_from = [&](const std::vector<detail::Checkpoint>& cps) {
      for (const auto& c : cps) {
        if (c.zeta > lo && c.zeta < hi) breaks.push_back(c.zeta);
      }
    };
    add_from(d_->forward);
    add_from(d_->backward);
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());
    const double w0 = d_->units.to_scaled_length(d_->init.w0);
    const double iw2 = 1.0 / (w0 * w0);
    auto f = [&](double zeta) {
      const PinneyState s = pinney_scaled(zeta);
      return 1.0 / (s[0] * s[0] + s[2] * s[2] * iw2);
    };
    QuadratureOptions opt;
    opt.rtol = rtol;
    opt.max_intervals = 20000 + 4 * breaks.size();
    const double val = integrate_or_throw(f, breaks, opt);
    return b >= a ? val : -val;
  }

  /// Same integral from the continuous Pinney angle atan2(v/W, u), whose
  /// z-derivative is exactly 2/(k w^2); the branch is fixed by a loose
  /// quadrature estimate.
  double gouy_by_angle(double z1, double z2) const {
    const double w0 = d_->units.to_scaled_length(d_->init.w0);
    auto angle = [&](double z) {
      const PinneyState s = pinney(z);
      return std::atan2(s[2] / w0, s[0]);
    };
    const double raw = angle(z2) - angle(z1);
    const double estimate = gouy_by_quadrature(z1, z2, 1e-7);
    const double turns = std::round((estimate - raw) / (2.0 * std::numbers::pi));
    return raw + 2.0 * std::numbers::pi * turns;
  }

  /// z values of stored integrator checkpoints (numeric backend only).
  std::vector<double> checkpoints() const {
    std::vector<double> z;
    for (auto it = d_->backward.rbegin(); it != d_->backward.rend(); ++it) {
      z.push_back(d_->init.z0 + d_->units.axial_scale() * it->zeta);
    }
    for (std::size_t i = d_->backward.empty() ? 0 : 1; i < d_->forward.size(); ++i) {
      z.push_back(d_->init.z0 + d_->units.axial_scale() * d_->forward[i].zeta);
    }
    return z;
  }

 private:
  friend EnvelopeSolution solve_envelope(const FieldProfile&, const BeamParams&,
                                         const EnvelopeInit&, ZInterval, const SolveOptions&);
  explicit EnvelopeSolution(std::shared_ptr<const detail::EnvelopeData> d) : d_(std::move(d)) {}

  void check(double z) const {
    if (!(z >= d_->domain.lo && z <= d_->domain.hi)) {
      throw OutOfDomain("envelope: z = " + std::to_string(z) + " outside solved domain [" +
                        std::to_string(d_->domain.lo) + ", " + std::to_string(d_->domain.hi) +
                        "]");
    }
  }

  PinneyState pinney_scaled(double zeta) const {
    const auto& d = *d_;
    const double w0 = d.units.to_scaled_length(d.init.w0);
    const double p = w0 * d.units.axial_scale() * d.init.R0.inverse();
    switch (d.backend) {
      case EnvelopeBackend::AnalyticConstant: {
        const double om = std::abs(d.scaled_omega(d.field, 0.0));
        const double c = std::cos(om * zeta), s = std::sin(om * zeta);
        return {w0 * c + p * s / om, -w0 * om * s + p * c, s / om, c};
      }
      case EnvelopeBackend::AnalyticFree:
        return {w0 + p * zeta, p, zeta, 1.0};
      case EnvelopeBackend::AnalyticGlaser: {
        const auto& g = d.field.as<FieldProfile::GlaserData>();
        const double beta = detail::glaser_beta(g, d.beam.speed());
        const double x = d.zeta(g.c);
        const auto b = detail::glaser_basis(zeta - x, g.a / d.units.axial_scale(), beta);
        return {d.ua * b.yc + d.ub * b.ys, d.ua * b.dyc + d.ub * b.dys,
                d.va * b.yc + d.vb * b.ys, d.va * b.dyc + d.vb * b.dys};
      }
      case EnvelopeBackend::NumericPinney:
        return numeric_state(zeta);
    }
    return {};
  }

  PinneyState numeric_state(double zeta) const {
    const auto& d = *d_;
    const detail::Checkpoint* cp = nullptr;
    if (zeta >= 0.0) {
      auto it = std::upper_bound(d.forward.begin(), d.forward.end(), zeta,
                                 [](double v, const detail::Checkpoint& c) { return v < c.zeta; });
      cp = &*(it == d.forward.begin() ? it : it - 1);
    } else {
      auto it = std::upper_bound(d.backward.begin(), d.backward.end(), zeta,
                                 [](double v, const detail::Checkpoint& c) { return v > c.zeta; });
      cp = &*(it == d.backward.begin() ? it : it - 1);
    }
    if (cp->zeta == zeta) return cp->state;
    const FieldProfile* prof = cp->profile;
    auto rhs = [&](double t, const PinneyState& y) -> PinneyState {
      const double om = d.scaled_omega(*prof, t);
      const double q = om * om;
      return {y[1], -q * y[0], y[3], -q * y[2]};
    };
    OdeOptions o = d.ode;
    o.initial_step = std::abs(zeta - cp->zeta);
    return integrate_adaptive(rhs, cp->state, cp->zeta, zeta, o);
  }

  std::shared_ptr<const detail::EnvelopeData> d_;
};

/// Solves for w(z) on `domain`.  Uniform, free and Glaser profiles use closed
/// forms; everything else integrates the linear pair with DOPRI5, splitting at
/// profile breakpoints.
inline EnvelopeSolution solve_envelope(const FieldProfile& field, const BeamParams& beam,
                                       const EnvelopeInit& init, ZInterval domain,
                                       const SolveOptions& opts = {}) {
  init.validate();
  if (!(domain.lo <= init.z0 && init.z0 <= domain.hi)) {
    throw std::invalid_argument("solve_envelope: domain must contain z0");
  }
  const ZInterval fd = field.domain();
  if (domain.lo < fd.lo || domain.hi > fd.hi) {
    throw OutOfDomain("solve_envelope: domain exceeds field profile domain");
  }

  EnvelopeBackend backend = EnvelopeBackend::NumericPinney;
  if (!opts.force_numeric) {
    switch (field.kind()) {
      case FieldKind::Uniform:
        backend = field.as<FieldProfile::UniformData>().omega == 0.0
                      ? EnvelopeBackend::AnalyticFree
                      : EnvelopeBackend::AnalyticConstant;
        break;
      case FieldKind::Free: backend = EnvelopeBackend::AnalyticFree; break;
      case FieldKind::Glaser: backend = EnvelopeBackend::AnalyticGlaser; break;
      default: break;
    }
  }

  auto data = std::make_shared<detail::EnvelopeData>(field, beam, init, domain, backend, opts.ode);
  auto& d = *data;
  const double w0 = d.units.to_scaled_length(init.w0);
  const double p = w0 * d.units.axial_scale() * init.R0.inverse();

  if (backend == EnvelopeBackend::AnalyticGlaser) {
    const auto& g = d.field.as<FieldProfile::GlaserData>();
    const double beta = detail::glaser_beta(g, beam.speed());
    const double a = g.a / d.units.axial_scale();
    const auto b = detail::glaser_basis(-d.zeta(g.c), a, beta);
    const double wb = beta * a;  // Wronskian of (Yc, Ys)
    d.ua = (w0 * b.dys - p * b.ys) / wb;
    d.ub = (p * b.yc - w0 * b.dyc) / wb;
    d.va = -b.ys / wb;
    d.vb = b.yc / wb;
  }

  if (backend == EnvelopeBackend::NumericPinney) {
    const PinneyState y0{w0, p, 0.0, 1.0};
    auto run = [&](std::vector<detail::Checkpoint>& out, std::vector<IntegrationSegment> segs,
                   bool forward_dir) {
      if (!forward_dir) std::reverse(segs.begin(), segs.end());
      out.push_back({0.0, y0, segs.empty() ? &d.field : segs.front().profile});
      PinneyState y = y0;
      for (std::size_t j = 0; j < segs.size(); ++j) {
        const FieldProfile* prof = segs[j].profile;
        out.back().profile = prof;
        const double from = d.zeta(forward_dir ? segs[j].begin : segs[j].end);
        const double to = d.zeta(forward_dir ? segs[j].end : segs[j].begin);
        auto rhs = [&](double t, const PinneyState& s) -> PinneyState {
          const double om = d.scaled_omega(*prof, t);
          const double q = om * om;
          return {s[1], -q * s[0], s[3], -q * s[2]};
        };
        y = integrate_adaptive(rhs, y, from, to, d.ode, [&](double t, const PinneyState& s) {
          out.push_back({t, s, prof});
        });
      }
    };
    run(d.forward, d.field.integration_segments(init.z0, domain.hi), true);
    run(d.backward, d.field.integration_segments(domain.lo, init.z0), false);
  }
  return EnvelopeSolution(std::move(data));
}

/// R = w / w'; +inf where the front is flat to working precision.
inline double curvature_radius(const EnvelopeSolution& sol, double z) {
  const EnvelopeSample s = sol.at(z);
  const double ratio = sol.units().axial_scale() / sol.units().length_scale();
  if (std::abs(s.dw * ratio) <= 1e-14 * sol.units().to_scaled_length(s.w)) {
    return std::numeric_limits<double>::infinity();
  }
  return s.w / s.dw;
}

// ---------------------------------------------------------------------------
// Closed forms in SI units.  Initial data are given at init.z0 (the formulas
// are usually quoted with the reference plane at z = 0).

/// Uniform field Omega != 0.
inline double analytic_constant_width(double omega, const BeamParams& beam,
                                      const EnvelopeInit& init, double z) {
  if (omega == 0.0) {
    throw DomainError("analytic_constant_width: omega = 0; use analytic_free_width");
  }
  const double k = beam.wavenumber();
  const double q = omega / beam.speed();
  const double dz = z - init.z0;
  const double w0 = init.w0;
  const double ir = init.R0.inverse();
  const double c = std::cos(q * dz), s = std::sin(q * dz);
  const double w2 = w0 * w0 *
                    (c * c + (ir * ir + 4.0 / (w0 * w0 * w0 * w0 * k * k)) / (q * q) * s * s +
                     ir / q * std::sin(2.0 * q * dz));
  return std::sqrt(w2);
}

inline double analytic_free_width(const BeamParams& beam, const EnvelopeInit& init, double z) {
  const double k = beam.wavenumber();
  const double dz = z - init.z0;
  const double w0 = init.w0;
  const double ir = init.R0.inverse();
  const double w2 =
      w0 * w0 * (1.0 + (ir * ir + 4.0 / (w0 * w0 * w0 * w0 * k * k)) * dz * dz + 2.0 * dz * ir);
  return std::sqrt(w2);
}

/// Glaser lens with initial width w_c and curvature R_c at the lens centre.
inline double analytic_glaser_width(double omega0, double a, double c, const BeamParams& beam,
                                    double w_c, const CurvatureRadius& R_c, double z) {
  if (!(a > 0.0)) throw std::invalid_argument("analytic_glaser_width: a must be positive");
  const double k = beam.wavenumber();
  const double t = a * omega0 / beam.speed();
  const double beta = std::sqrt(1.0 + t * t);
  const double x = z - c;
  const double alpha = beta * std::atan(x / a);
  const double ir = R_c.inverse();
  const double cs = std::cos(alpha), sn = std::sin(alpha);
  const double bracket = cs * cs + a / beta * ir * std::sin(2.0 * alpha) +
                         a * a / (beta * beta) * (ir * ir + 4.0 / (k * k * w_c * w_c * w_c * w_c)) *
                             sn * sn;
  return std::sqrt(w_c * w_c * (a * a + x * x) / (a * a) * bracket);
}

/// Oscillation-free Glaser width: w_c^2 = 2a/(beta k), flat front at z = c.
inline double glaser_matched_width(double omega0, double a, const BeamParams& beam) {
  const double t = a * omega0 / beam.speed();
  return std::sqrt(2.0 * a / (std::sqrt(1.0 + t * t) * beam.wavenumber()));
}

}  // namespace vortexlens
