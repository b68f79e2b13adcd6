#pragma once

#include <cmath>
#include <string>

#include "vortexlens/errors.hpp"

namespace vortexlens {

/// SI constants.  Defaults are CODATA-2018 exact/recommended values.
struct PhysicalConstants {
  double hbar = 1.054571817e-34;            // J s
  double electron_mass = 9.1093837015e-31;  // kg
  double elementary_charge = 1.602176634e-19;  // C
  double speed_of_light = 299792458.0;      // m/s

  void validate() const {
    if (!(hbar > 0.0) || !(electron_mass > 0.0) || !(elementary_charge > 0.0) ||
        !(speed_of_light > 0.0)) {
      throw std::invalid_argument("physical constants must be strictly positive");
    }
  }
};

inline constexpr PhysicalConstants kCodata2018{};

/// Larmor frequency Omega = e B / (2 m_e), sign of B preserved.
inline double larmor_from_B(double tesla, const PhysicalConstants& c = kCodata2018) {
  return c.elementary_charge * tesla / (2.0 * c.electron_mass);
}

/// Inverse of larmor_from_B.
inline double field_from_larmor(double omega, const PhysicalConstants& c = kCodata2018) {
  return 2.0 * c.electron_mass * omega / c.elementary_charge;
}

/// Width of the stationary Landau mode, sqrt(2 hbar / (m_e |Omega|)).
inline double landau_width(double omega, const PhysicalConstants& c = kCodata2018) {
  if (omega == 0.0 || !std::isfinite(omega)) {
    throw DomainError("landau_width: no finite Landau width for omega = 0");
  }
  return std::sqrt(2.0 * c.hbar / (c.electron_mass * std::abs(omega)));
}

/// Electron kinematics.  Only the wavenumber is stored; the axial speed is
/// always derived as hbar k / m_e.
class BeamParams {
 public:
  static BeamParams from_wavenumber(double k, const PhysicalConstants& c = kCodata2018) {
    c.validate();
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw std::invalid_argument("beam wavenumber must be positive and finite");
    }
    return BeamParams(k, c);
  }

  static BeamParams from_speed(double v, const PhysicalConstants& c = kCodata2018) {
    return from_wavenumber(c.electron_mass * v / c.hbar, c);
  }

  static BeamParams from_speed_fraction(double beta, const PhysicalConstants& c = kCodata2018) {
    return from_speed(beta * c.speed_of_light, c);
  }

  /// Non-relativistic: E = m v^2 / 2.
  static BeamParams from_kinetic_energy_eV(double energy_eV,
                                           const PhysicalConstants& c = kCodata2018) {
    if (!(energy_eV > 0.0)) {
      throw std::invalid_argument("kinetic energy must be positive");
    }
    const double joules = energy_eV * c.elementary_charge;
    return from_speed(std::sqrt(2.0 * joules / c.electron_mass), c);
  }

  double wavenumber() const noexcept { return k_; }
  double speed() const noexcept { return constants_.hbar * k_ / constants_.electron_mass; }
  const PhysicalConstants& constants() const noexcept { return constants_; }

  double rayleigh_length(double w0) const {
    if (!(w0 > 0.0)) {
      throw std::invalid_argument("rayleigh_length: w0 must be positive");
    }
    return k_ * w0 * w0 / 2.0;
  }

 private:
  BeamParams(double k, const PhysicalConstants& c) : k_(k), constants_(c) {}

  double k_;
  PhysicalConstants constants_;
};

/// Dimensionless variables used inside the solvers.
///
/// Transverse lengths (rho, w) are measured in `length_scale` L and the axial
/// coordinate in `axial_scale` Z = k L^2 / 2.  With this pairing the lensing
/// equation reads w'' + omega~^2 w = 1 / w^3 with omega~ = Omega Z / v, so a
/// Landau mode of width L has |omega~| = 1.
class ScaledUnits {
 public:
  ScaledUnits(const BeamParams& beam, double length_scale)
      : length_(length_scale), axial_(beam.rayleigh_length(length_scale)),
        speed_(beam.speed()), hbar_(beam.constants().hbar) {}

  double length_scale() const noexcept { return length_; }
  double axial_scale() const noexcept { return axial_; }
  /// v / Z, the unit of Omega.
  double frequency_scale() const noexcept { return speed_ / axial_; }
  /// hbar v / Z, the unit of transverse energy.
  double energy_scale() const noexcept { return hbar_ * speed_ / axial_; }

  double to_scaled_length(double x) const noexcept { return x / length_; }
  double from_scaled_length(double x) const noexcept { return x * length_; }
  double to_scaled_z(double z) const noexcept { return z / axial_; }
  double from_scaled_z(double z) const noexcept { return z * axial_; }
  double to_scaled_omega(double omega) const noexcept { return omega / frequency_scale(); }
  double from_scaled_omega(double omega) const noexcept { return omega * frequency_scale(); }

 private:
  double length_;
  double axial_;
  double speed_;
  double hbar_;
};

}  // namespace vortexlens
