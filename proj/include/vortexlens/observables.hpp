#pragma once

// Gauge-invariant expectation values <T_perp>, <rho^2>, <L_mech>, <G_perp>
// and the Ermakov-Lewis invariant built from them.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "vortexlens/constants.hpp"
#include "vortexlens/errors.hpp"
#include "vortexlens/fields.hpp"
#include "vortexlens/lensing.hpp"
#include "vortexlens/modes.hpp"
#include "vortexlens/ode.hpp"
#include "vortexlens/quadrature.hpp"

namespace vortexlens {

struct ObservableState {
  double t_perp = 0;  // J
  double rho2 = 0;    // m^2
  double l_mech = 0;  // J s, mechanical (r x pi)_z
  double g_perp = 0;  // J s
  double z = 0;       // m
};

/// L_z = L_mech - m Omega rho^2 (the canonical, conserved angular momentum).
inline double canonical_angular_momentum(const ObservableState& s, const FieldProfile& field,
                                         const PhysicalConstants& c = kCodata2018) {
  return s.l_mech - c.electron_mass * field.omega(s.z) * s.rho2;
}

/// Field angular momentum -m Omega <rho^2> in the symmetric gauge.
inline double em_angular_momentum(const ObservableState& s, const FieldProfile& field,
                                  const PhysicalConstants& c = kCodata2018) {
  return -c.electron_mass * field.omega(s.z) * s.rho2;
}

namespace detail {

// (t, r, l, g) in units (hbar v/Z, L^2, hbar, hbar).
struct ObservableScaling {
  ScaledUnits units;
  double hbar;

  OdeState<4> to_scaled(const ObservableState& s) const {
    return {s.t_perp / units.energy_scale(), s.rho2 / (units.length_scale() * units.length_scale()),
            s.l_mech / hbar, s.g_perp / hbar};
  }
  ObservableState from_scaled(const OdeState<4>& y, double z) const {
    return {y[0] * units.energy_scale(), y[1] * units.length_scale() * units.length_scale(),
            y[2] * hbar, y[3] * hbar, z};
  }
};

}  // namespace detail

/// Integrates the closed linear system
///   d<T>/dz   = Omega' <L>
///   d<rho2>/dz = 2 <G> / (m v)
///   d<L>/dz   = Omega' m <rho2> + 2 Omega <G> / v
///   d<G>/dz   = 2 (<T> - Omega <L>) / v
/// with the delta-function part of Omega' applied at steps of the profile,
/// from s0 through the monotone grid `zs` (zs.front() == s0.z) and returns
/// the state at every grid point.
inline std::vector<ObservableState> propagate_observables(const FieldProfile& field,
                                                          const BeamParams& beam,
                                                          const ObservableState& s0,
                                                          const std::vector<double>& zs,
                                                          const OdeOptions& ode = {}) {
  if (zs.empty()) return {};
  if (zs.front() != s0.z) {
    throw std::invalid_argument("propagate_observables: grid must start at s0.z");
  }
  if (!(s0.rho2 > 0.0)) throw std::invalid_argument("propagate_observables: rho2 must be > 0");
  const bool ascending = zs.size() < 2 || zs.back() >= zs.front();
  for (std::size_t i = 1; i < zs.size(); ++i) {
    if (ascending ? zs[i] < zs[i - 1] : zs[i] > zs[i - 1]) {
      throw std::invalid_argument("propagate_observables: grid must be monotone");
    }
  }
  const detail::ObservableScaling sc{ScaledUnits(beam, std::sqrt(s0.rho2)),
                                     beam.constants().hbar};
  const double zscale = sc.units.axial_scale();
  const double fscale = sc.units.frequency_scale();

  std::vector<ObservableState> out;
  out.reserve(zs.size());
  out.push_back(s0);
  OdeState<4> y = sc.to_scaled(s0);
  // Omega (scaled) that the current state's mechanical quantities refer to.
  double om_state = field.omega(s0.z) / fscale;
  // A step in Omega: the wavefunction is continuous, so canonical L_z,
  // <rho^2> and <G> carry over while T and L_mech pick up the jump.
  auto apply_step = [&](double om_b) {
    if (om_b == om_state) return;
    const double lc = y[2] - 2.0 * om_state * y[1];
    y[0] += (om_b - om_state) * lc + (om_b * om_b - om_state * om_state) * y[1];
    y[2] = lc + 2.0 * om_b * y[1];
    om_state = om_b;
  };
  for (std::size_t i = 1; i < zs.size(); ++i) {
    const double lo = std::min(zs[i - 1], zs[i]), hi = std::max(zs[i - 1], zs[i]);
    auto segs = field.integration_segments(lo, hi);
    if (!ascending) std::reverse(segs.begin(), segs.end());
    for (const auto& seg : segs) {
      const FieldProfile* prof = seg.profile;
      apply_step(prof->omega(ascending ? seg.begin : seg.end) / fscale);
      auto rhs = [&](double zeta, const OdeState<4>& s) -> OdeState<4> {
        const double z = zeta * zscale;
        const double om = prof->omega(z) / fscale;
        const double dom = prof->domega(z) * zscale / fscale;
        return {dom * s[2], s[3], 2.0 * dom * s[1] + 2.0 * om * s[3], 2.0 * (s[0] - om * s[2])};
      };
      const double from = (ascending ? seg.begin : seg.end) / zscale;
      const double to = (ascending ? seg.end : seg.begin) / zscale;
      y = integrate_adaptive(rhs, y, from, to, ode);
      om_state = prof->omega(ascending ? seg.end : seg.begin) / fscale;
    }
    // Profiles are right-continuous, so a grid point on a step sees the new value.
    apply_step(field.omega(zs[i]) / fscale);
    out.push_back(sc.from_scaled(y, zs[i]));
  }
  return out;
}

/// Closed forms for a single mode; F = (2n+|l|+1)/2 is the radial moment
/// <rho^2>/w^2 of the Laguerre-Gaussian profile.
inline double radial_moment_factor(const QuantumNumbers& qn) {
  return 0.5 * qn.invariant_eigenvalue();
}

inline ObservableState single_mode_observables(const QuantumNumbers& qn,
                                               const EnvelopeSolution& env, double z) {
  const auto& c = env.beam().constants();
  const double m = c.electron_mass, hbar = c.hbar;
  const double v = env.beam().speed();
  const double f = radial_moment_factor(qn);
  const EnvelopeSample s = env.at(z);
  const double ddw = env.second_derivative(z);
  const double om = env.field().omega(z);
  const double w2 = s.w * s.w;
  ObservableState out;
  out.z = z;
  out.rho2 = f * w2;
  out.g_perp = f * m * v * s.w * s.dw;
  out.l_mech = hbar * qn.l + f * m * om * w2;
  out.t_perp = hbar * qn.l * om + f * m * (0.5 * v * v * (s.dw * s.dw + s.w * ddw) + om * om * w2);
  return out;
}

/// Ermakov-Lewis invariant in units of hbar, with operators replaced by
/// expectation values and w taken from `env` at s.z.  For a pure mode this is
/// 2n+|l|+1; along any trajectory of propagate_observables it is constant.
inline double ermakov_lewis(const ObservableState& s, const EnvelopeSolution& env) {
  const auto& u = env.units();
  const double hbar = env.beam().constants().hbar;
  const EnvelopeSample e = env.at(s.z);
  const double w = u.to_scaled_length(e.w);
  const double dw = e.dw * u.axial_scale() / u.length_scale();
  const double om = u.to_scaled_omega(env.field().omega(s.z));
  const double ddw = 1.0 / (w * w * w) - om * om * w;
  const double t = s.t_perp / u.energy_scale();
  const double r = s.rho2 / (u.length_scale() * u.length_scale());
  const double l = s.l_mech / hbar;
  const double g = s.g_perp / hbar;
  return w * w * (t - om * l) - w * dw * g + (2.0 * om * om * w * w + dw * dw + w * ddw) * r;
}

inline double ermakov_lewis(const ModeSpec& m, double z) {
  return ermakov_lewis(single_mode_observables(m.qn, m.envelope, z), m.envelope);
}

struct QuadratureMomentOptions {
  /// Radial truncation; 0 selects 24 * w_hint.
  double rho_max = 0.0;
  std::size_t azimuthal_points = 64;
  /// Finite-difference step in units of w_hint.
  double fd_step = 2e-3;
  double rtol = 1e-11;
  /// Allowed relative change of the kinetic term between steps h and 2h.
  double richardson_tol = 1e-6;
};

/// Independent route to the four observables: 2D quadrature of the sampled
/// wavefunction chi(rho, phi) with fourth-order central differences for the
/// gradient.  chi must be normalised; Omega is the field at this plane.
template <class Sampler>
ObservableState quadrature_moments(const Sampler& chi, double w_hint, double omega,
                                   const BeamParams& beam, double z,
                                   const QuadratureMomentOptions& opt = {}) {
  const auto& c = beam.constants();
  const double m = c.electron_mass, hbar = c.hbar;
  const double rho_max = opt.rho_max > 0.0 ? opt.rho_max : 24.0 * w_hint;
  const double h = opt.fd_step * w_hint;
  const std::size_t np = opt.azimuthal_points;

  auto at_xy = [&](double x, double y) { return chi(std::hypot(x, y), std::atan2(y, x)); };
  auto d4 = [](cplx fm2, cplx fm1, cplx fp1, cplx fp2, double step) {
    return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * step);
  };

  // Components: norm, rho^2/w^2, G/hbar, Lz/hbar, |grad|^2 w^2 (step h and 2h).
  using Vec = std::array<double, 6>;
  auto radial = [&](double rho) -> Vec {
    Vec acc{};
    const double dphi = 2.0 * std::numbers::pi / static_cast<double>(np);
    for (std::size_t j = 0; j < np; ++j) {
      const double phi = dphi * static_cast<double>(j);
      const double cs = std::cos(phi), sn = std::sin(phi);
      const double x = rho * cs, y = rho * sn;
      const cplx f0 = chi(rho, phi);
      std::array<cplx, 9> sx, sy;
      for (int k = -4; k <= 4; ++k) {
        if (k == 0) continue;
        sx[k + 4] = at_xy(x + k * h, y);
        sy[k + 4] = at_xy(x, y + k * h);
      }
      const cplx dx = d4(sx[2], sx[3], sx[5], sx[6], h);
      const cplx dy = d4(sy[2], sy[3], sy[5], sy[6], h);
      const cplx dx2 = d4(sx[0], sx[2], sx[6], sx[8], 2.0 * h);
      const cplx dy2 = d4(sy[0], sy[2], sy[6], sy[8], 2.0 * h);
      const cplx drho = cs * dx + sn * dy;
      const cplx dphi_chi = x * dy - y * dx;
      const double n2 = std::norm(f0);
      acc[0] += n2;
      acc[1] += n2 * rho * rho / (w_hint * w_hint);
      acc[2] += std::imag(std::conj(f0) * rho * drho);
      acc[3] += std::imag(std::conj(f0) * dphi_chi);
      acc[4] += (std::norm(dx) + std::norm(dy)) * w_hint * w_hint;
      acc[5] += (std::norm(dx2) + std::norm(dy2)) * w_hint * w_hint;
    }
    return acc * (dphi * rho);
  };
  QuadratureOptions qo;
  qo.rtol = opt.rtol;
  qo.atol = 1e-14 / w_hint;
  const Vec r = integrate_or_throw(radial, 0.0, rho_max, qo);

  const double kin_h = r[4], kin_2h = r[5];
  if (std::abs(kin_h - kin_2h) > opt.richardson_tol * std::abs(kin_h)) {
    throw SolverError("quadrature_moments: gradient not resolved (Richardson check failed)");
  }
  const double rho2 = r[1] * w_hint * w_hint;
  const double lz = hbar * r[3];
  ObservableState s;
  s.z = z;
  s.rho2 = rho2;
  s.g_perp = hbar * r[2];
  s.l_mech = lz + m * omega * rho2;
  s.t_perp = hbar * hbar / (2.0 * m) * kin_h / (w_hint * w_hint) + 0.5 * m * omega * omega * rho2 +
             omega * lz;
  return s;
}

/// Norm int |chi|^2 dA of a sampled wavefunction (radial GK x trapezoid).
template <class Sampler>
double quadrature_norm(const Sampler& chi, double rho_max, std::size_t azimuthal_points = 64) {
  const cplx v = inner_product(chi, chi, rho_max, azimuthal_points, 1e-13);
  return v.real();
}

}  // namespace vortexlens
