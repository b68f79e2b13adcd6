#pragma once

// Independent numerical checks shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "vortexlens/lensing.hpp"
#include "vortexlens/modes.hpp"

namespace vortexlens::oracle {

/// Scaled Ermakov-Pinney residual 1/w^4 - w''/w - omega^2 at z, with w'' from
/// a sixth-order central difference of dw/dz (step delta in metres).
inline double ep_residual_scaled(const EnvelopeSolution& sol, double z, double delta) {
  const auto& u = sol.units();
  auto dw = [&](double x) { return sol.slope(x) * u.axial_scale() / u.length_scale(); };
  const double h = delta / u.axial_scale();
  const double d2 = (-dw(z - 3 * delta) + 9 * dw(z - 2 * delta) - 45 * dw(z - delta) +
                     45 * dw(z + delta) - 9 * dw(z + 2 * delta) + dw(z + 3 * delta)) /
                    (60 * h);
  const double w = u.to_scaled_length(sol.width(z));
  const double om = u.to_scaled_omega(sol.field().omega(z));
  return 1.0 / (w * w * w * w) - d2 / w - om * om;
}

/// Threshold reference max(omega_peak^2, (Z / z_span)^2) in scaled units.
inline double ep_reference(const EnvelopeSolution& sol, double lo, double hi) {
  const auto& u = sol.units();
  const double om = u.to_scaled_omega(sol.field().peak_abs_omega(lo, hi));
  const double span = (hi - lo) / u.axial_scale();
  return std::max(om * om, 1.0 / (span * span));
}

/// Worst |residual| / reference over an n-point grid strictly inside [lo, hi]
/// (the stencil needs 3 delta of room on each side).
inline double ep_worst(const EnvelopeSolution& sol, double lo, double hi, int n, double delta) {
  const double a = lo + 3.5 * delta, b = hi - 3.5 * delta;
  const double ref = ep_reference(sol, lo, hi);
  const auto breaks = sol.field().breakpoints();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = a + (b - a) * i / (n - 1.0);
    const bool straddles = std::any_of(breaks.begin(), breaks.end(),
                                       [&](double bp) { return std::abs(z - bp) < 3.5 * delta; });
    if (straddles) continue;
    worst = std::max(worst, std::abs(ep_residual_scaled(sol, z, delta)) / ref);
  }
  return worst;
}

/// Finite-difference step: 1/200 of the shortest length on which w varies.
inline double ep_step(const EnvelopeSolution& sol, double lo, double hi, double field_scale) {
  const auto& u = sol.units();
  const double om = std::abs(sol.field().peak_abs_omega(lo, hi));
  double s = u.axial_scale();
  if (om > 0.0) s = std::min(s, sol.beam().speed() / om);
  if (field_scale > 0.0) s = std::min(s, field_scale);
  return s / 200.0;
}

struct ParaxialResidual {
  double residual_norm = 0.0;  // || i hbar v dchi/dz - T chi ||
  double t_norm = 0.0;         // || T chi ||
  double relative() const { return residual_norm / t_norm; }
};

/// Residual of the effective Schrodinger equation i hbar v dchi/dz = T chi on
/// the Cartesian grid of spacing h covering [-R, R]^2.  T = -hbar^2/(2m) lap +
/// m Omega^2 rho^2 / 2 + Omega L_z with the Laplacian and L_z = -i hbar
/// (x d_y - y d_x) by fourth-order central differences; dchi/dz is the
/// analytic derivative provided by the slice.
template <class Slice>
ParaxialResidual paraxial_residual(const Slice& slice, double omega, const BeamParams& beam,
                                   double h, double half_extent) {
  using cplx = std::complex<double>;
  const auto& pc = beam.constants();
  const double hbar = pc.hbar, m = pc.electron_mass, v = beam.speed();
  const int n = static_cast<int>(std::floor(half_extent / h));
  const int side = 2 * n + 1;
  std::vector<cplx> grid(static_cast<std::size_t>(side) * side);
  auto at = [&](int i, int j) -> cplx& { return grid[static_cast<std::size_t>(j) * side + i]; };
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      const double x = (i - n) * h, y = (j - n) * h;
      at(i, j) = slice(std::hypot(x, y), std::atan2(y, x));
    }
  }
  double rn = 0.0, tn = 0.0;
  for (int j = 2; j < side - 2; ++j) {
    for (int i = 2; i < side - 2; ++i) {
      const double x = (i - n) * h, y = (j - n) * h;
      const cplx f = at(i, j);
      const cplx dxx = (-at(i + 2, j) + 16.0 * at(i + 1, j) - 30.0 * f + 16.0 * at(i - 1, j) - at(i - 2, j)) /
                       (12.0 * h * h);
      const cplx dyy = (-at(i, j + 2) + 16.0 * at(i, j + 1) - 30.0 * f + 16.0 * at(i, j - 1) - at(i, j - 2)) /
                       (12.0 * h * h);
      const cplx dx = (at(i - 2, j) - 8.0 * at(i - 1, j) + 8.0 * at(i + 1, j) - at(i + 2, j)) / (12.0 * h);
      const cplx dy = (at(i, j - 2) - 8.0 * at(i, j - 1) + 8.0 * at(i, j + 1) - at(i, j + 2)) / (12.0 * h);
      const cplx lz = cplx(0.0, -hbar) * (x * dy - y * dx);
      const cplx t = -hbar * hbar / (2.0 * m) * (dxx + dyy) + 0.5 * m * omega * omega * (x * x + y * y) * f +
                     omega * lz;
      const cplx lhs = cplx(0.0, hbar * v) * slice.dz(std::hypot(x, y), std::atan2(y, x));
      rn += std::norm(lhs - t);
      tn += std::norm(t);
    }
  }
  return {std::sqrt(rn * h * h), std::sqrt(tn * h * h)};
}

/// Azimuth of the intensity maximum of `f` on the ring rho, refined by a
/// parabola through the best of `samples` equispaced angles.
template <class Field>
double azimuthal_peak(const Field& f, double rho, int samples = 720) {
  std::vector<double> val(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) val[i] = std::norm(f(rho, 2 * std::numbers::pi * i / samples));
  int best = 0;
  for (int i = 1; i < samples; ++i)
    if (val[i] > val[best]) best = i;
  const double ym = val[(best + samples - 1) % samples], y0 = val[best], yp = val[(best + 1) % samples];
  const double shift = 0.5 * (ym - yp) / (ym - 2 * y0 + yp);
  return 2 * std::numbers::pi * (best + shift) / samples;
}

/// Least-squares slope of unwrapped angles against z.
inline double unwrapped_rate(const std::vector<double>& z, std::vector<double> phi) {
  for (std::size_t i = 1; i < phi.size(); ++i) {
    while (phi[i] - phi[i - 1] > std::numbers::pi) phi[i] -= 2 * std::numbers::pi;
    while (phi[i] - phi[i - 1] < -std::numbers::pi) phi[i] += 2 * std::numbers::pi;
  }
  const double nz = static_cast<double>(z.size());
  double sz = 0, sp = 0, szz = 0, szp = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    sz += z[i];
    sp += phi[i];
    szz += z[i] * z[i];
    szp += z[i] * phi[i];
  }
  return (nz * szp - sz * sp) / (nz * szz - sz * sz);
}

}  // namespace vortexlens::oracle
