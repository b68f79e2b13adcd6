#pragma once

// Axial Larmor-frequency profiles Omega(z) and the paraxial 3D field they imply.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "vortexlens/constants.hpp"
#include "vortexlens/errors.hpp"
#include "vortexlens/spline.hpp"

namespace vortexlens {

enum class FieldKind { Uniform, Free, Glaser, LinearRamp, SmoothRamp, Piecewise, Tabulated };

inline const char* to_string(FieldKind k) {
  switch (k) {
    case FieldKind::Uniform: return "uniform";
    case FieldKind::Free: return "free";
    case FieldKind::Glaser: return "glaser";
    case FieldKind::LinearRamp: return "linear_ramp";
    case FieldKind::SmoothRamp: return "smooth_ramp";
    case FieldKind::Piecewise: return "piecewise";
    case FieldKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

struct ZInterval {
  double lo;
  double hi;
  bool contains(double z) const noexcept { return z >= lo && z <= hi; }
  double length() const noexcept { return hi - lo; }
};

struct PiecewiseSegment;
class FieldProfile;

/// A sub-interval on which a single smooth profile governs the field.  Produced
/// by FieldProfile::integration_segments for solvers that must not step across
/// discontinuities or kinks.
struct IntegrationSegment {
  double begin;
  double end;
  const FieldProfile* profile;
};

/// Immutable Omega(z) profile.  Copies share their (immutable) payload.
class FieldProfile {
 public:
  struct UniformData { double omega; };
  struct FreeData {};
  struct GlaserData { double omega0, a, c; };
  struct RampData { double z_i, z_f, omega_i, omega_f; };
  struct LinearRampData : RampData {};
  struct SmoothRampData : RampData {};
  struct PiecewiseData { std::shared_ptr<const std::vector<PiecewiseSegment>> segments; };
  struct TabulatedData { std::shared_ptr<const NaturalCubicSpline> spline; };

  static FieldProfile uniform(double omega) { return FieldProfile(UniformData{omega}); }
  static FieldProfile free() { return FieldProfile(FreeData{}); }

  static FieldProfile glaser(double omega0, double a, double c) {
    if (!(a > 0.0)) throw std::invalid_argument("glaser: half-width a must be positive");
    return FieldProfile(GlaserData{omega0, a, c});
  }

  static FieldProfile linear_ramp(double z_i, double z_f, double omega_i, double omega_f) {
    check_ramp(z_i, z_f);
    return FieldProfile(LinearRampData{{z_i, z_f, omega_i, omega_f}});
  }

  /// C^1 ramp following the cubic smoothstep 3 s^2 - 2 s^3.
  static FieldProfile smooth_ramp(double z_i, double z_f, double omega_i, double omega_f) {
    check_ramp(z_i, z_f);
    return FieldProfile(SmoothRampData{{z_i, z_f, omega_i, omega_f}});
  }

  /// Contiguous segments in increasing z.  The first may begin at -inf and the
  /// last may end at +inf.  At a shared breakpoint the right segment applies.
  static FieldProfile piecewise(std::vector<PiecewiseSegment> segments);

  static FieldProfile tabulated(std::vector<double> z, std::vector<double> omega) {
    return FieldProfile(TabulatedData{
        std::make_shared<const NaturalCubicSpline>(std::move(z), std::move(omega))});
  }

  /// Loads a two-column CSV with header `z_m,omega_rad_per_s`.
  static FieldProfile from_csv(const std::string& path);

  FieldKind kind() const noexcept {
    return std::visit(
        [](const auto& d) {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, UniformData>) return FieldKind::Uniform;
          else if constexpr (std::is_same_v<D, FreeData>) return FieldKind::Free;
          else if constexpr (std::is_same_v<D, GlaserData>) return FieldKind::Glaser;
          else if constexpr (std::is_same_v<D, LinearRampData>) return FieldKind::LinearRamp;
          else if constexpr (std::is_same_v<D, SmoothRampData>) return FieldKind::SmoothRamp;
          else if constexpr (std::is_same_v<D, PiecewiseData>) return FieldKind::Piecewise;
          else return FieldKind::Tabulated;
        },
        data_);
  }

  template <class D>
  const D& as() const { return std::get<D>(data_); }

  ZInterval domain() const;
  double omega(double z) const;
  /// dOmega/dz; one-sided from the right at breakpoints and ramp ends.
  double domega(double z) const;
  /// Integral of Omega over [z1, z2].
  double omega_integral(double z1, double z2) const;

  /// Points where Omega or one of its low derivatives is not smooth.
  std::vector<double> breakpoints() const;

  /// Splits [lo, hi] into pieces each governed by a single smooth profile.
  std::vector<IntegrationSegment> integration_segments(double lo, double hi) const;

  /// max |Omega| over [lo, hi] (exact for closed forms, sampled for tabulated).
  double peak_abs_omega(double lo, double hi) const;

 private:
  using Data = std::variant<UniformData, FreeData, GlaserData, LinearRampData, SmoothRampData,
                            PiecewiseData, TabulatedData>;

  explicit FieldProfile(Data d) : data_(std::move(d)) {}

  static void check_ramp(double z_i, double z_f) {
    if (!(z_i < z_f)) throw std::invalid_argument("ramp: require z_i < z_f");
  }

  const PiecewiseSegment& segment_at(double z) const;
  void check_in_domain(double z) const {
    const auto d = domain();
    if (!(z >= d.lo && z <= d.hi)) {
      throw OutOfDomain("field profile: z = " + std::to_string(z) + " outside domain");
    }
  }

  Data data_;
};

struct PiecewiseSegment {
  double begin;
  double end;
  FieldProfile profile;
};

inline FieldProfile FieldProfile::piecewise(std::vector<PiecewiseSegment> segments) {
  if (segments.empty()) throw std::invalid_argument("piecewise: no segments");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!(segments[i].begin < segments[i].end)) {
      throw std::invalid_argument("piecewise: segment " + std::to_string(i) +
                                  " has begin >= end");
    }
    if (i + 1 < segments.size() && segments[i].end != segments[i + 1].begin) {
      throw std::invalid_argument("piecewise: segments " + std::to_string(i) + " and " +
                                  std::to_string(i + 1) + " are not contiguous");
    }
  }
  return FieldProfile(PiecewiseData{
      std::make_shared<const std::vector<PiecewiseSegment>>(std::move(segments))});
}

inline FieldProfile FieldProfile::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open field table '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty field table '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "z_m,omega_rad_per_s") {
    throw std::runtime_error("field table '" + path +
                             "': expected header 'z_m,omega_rad_per_s'");
  }
  std::vector<double> z, w;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
      throw std::runtime_error("field table '" + path + "': malformed line " +
                               std::to_string(lineno));
    }
    try {
      z.push_back(std::stod(a));
      w.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw std::runtime_error("field table '" + path + "': bad number on line " +
                               std::to_string(lineno));
    }
  }
  return tabulated(std::move(z), std::move(w));
}

inline ZInterval FieldProfile::domain() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (auto* p = std::get_if<PiecewiseData>(&data_)) {
    return {p->segments->front().begin, p->segments->back().end};
  }
  if (auto* t = std::get_if<TabulatedData>(&data_)) {
    return {t->spline->front(), t->spline->back()};
  }
  return {-inf, inf};
}

inline const PiecewiseSegment& FieldProfile::segment_at(double z) const {
  const auto& segs = *std::get<PiecewiseData>(data_).segments;
  check_in_domain(z);
  auto it = std::upper_bound(segs.begin(), segs.end(), z,
                             [](double v, const PiecewiseSegment& s) { return v < s.begin; });
  if (it != segs.begin()) --it;
  return *it;
}

namespace detail {
inline double smoothstep(double s) { return s * s * (3.0 - 2.0 * s); }
inline double smoothstep_slope(double s) { return 6.0 * s * (1.0 - s); }
// Antiderivative of smoothstep, zero at s = 0.
inline double smoothstep_integral(double s) { return s * s * s * (1.0 - 0.5 * s); }
}  // namespace detail

inline double FieldProfile::omega(double z) const {
  return std::visit(
      [&](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, UniformData>) {
          return d.omega;
        } else if constexpr (std::is_same_v<D, FreeData>) {
          return 0.0;
        } else if constexpr (std::is_same_v<D, GlaserData>) {
          const double x = (z - d.c) / d.a;
          return d.omega0 / (1.0 + x * x);
        } else if constexpr (std::is_same_v<D, LinearRampData> ||
                             std::is_same_v<D, SmoothRampData>) {
          if (z <= d.z_i) return d.omega_i;
          if (z >= d.z_f) return d.omega_f;
          const double s = (z - d.z_i) / (d.z_f - d.z_i);
          const double f = std::is_same_v<D, LinearRampData> ? s : detail::smoothstep(s);
          return d.omega_i + (d.omega_f - d.omega_i) * f;
        } else if constexpr (std::is_same_v<D, PiecewiseData>) {
          return segment_at(z).profile.omega(z);
        } else {
          return d.spline->value(z);
        }
      },
      data_);
}

inline double FieldProfile::domega(double z) const {
  return std::visit(
      [&](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, UniformData> || std::is_same_v<D, FreeData>) {
          return 0.0;
        } else if constexpr (std::is_same_v<D, GlaserData>) {
          const double x = (z - d.c) / d.a;
          const double den = 1.0 + x * x;
          return -2.0 * d.omega0 * x / (d.a * den * den);
        } else if constexpr (std::is_same_v<D, LinearRampData> ||
                             std::is_same_v<D, SmoothRampData>) {
          if (z < d.z_i || z >= d.z_f) return 0.0;
          const double len = d.z_f - d.z_i;
          const double s = (z - d.z_i) / len;
          const double f = std::is_same_v<D, LinearRampData> ? 1.0 : detail::smoothstep_slope(s);
          return (d.omega_f - d.omega_i) * f / len;
        } else if constexpr (std::is_same_v<D, PiecewiseData>) {
          return segment_at(z).profile.domega(z);
        } else {
          return d.spline->derivative(z);
        }
      },
      data_);
}

inline double FieldProfile::omega_integral(double z1, double z2) const {
  if (z1 == z2) return 0.0;
  if (z1 > z2) return -omega_integral(z2, z1);
  return std::visit(
      [&](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, UniformData>) {
          return d.omega * (z2 - z1);
        } else if constexpr (std::is_same_v<D, FreeData>) {
          return 0.0;
        } else if constexpr (std::is_same_v<D, GlaserData>) {
          return d.omega0 * d.a *
                 (std::atan((z2 - d.c) / d.a) - std::atan((z1 - d.c) / d.a));
        } else if constexpr (std::is_same_v<D, LinearRampData> ||
                             std::is_same_v<D, SmoothRampData>) {
          const double len = d.z_f - d.z_i;
          auto prim = [&](double z) {
            // Antiderivative anchored at z_i.
            if (z <= d.z_i) return d.omega_i * (z - d.z_i);
            const double s = std::min(1.0, (z - d.z_i) / len);
            const double shape = std::is_same_v<D, LinearRampData>
                                     ? 0.5 * s * s
                                     : detail::smoothstep_integral(s);
            double acc = d.omega_i * s * len + (d.omega_f - d.omega_i) * shape * len;
            if (z > d.z_f) acc += d.omega_f * (z - d.z_f);
            return acc;
          };
          return prim(z2) - prim(z1);
        } else if constexpr (std::is_same_v<D, PiecewiseData>) {
          check_in_domain(z1);
          check_in_domain(z2);
          double acc = 0.0;
          for (const auto& s : *d.segments) {
            const double lo = std::max(z1, s.begin);
            const double hi = std::min(z2, s.end);
            if (hi > lo) acc += s.profile.omega_integral(lo, hi);
          }
          return acc;
        } else {
          return d.spline->integral(z1, z2);
        }
      },
      data_);
}

inline std::vector<double> FieldProfile::breakpoints() const {
  std::vector<double> out;
  if (auto* r = std::get_if<LinearRampData>(&data_)) out = {r->z_i, r->z_f};
  if (auto* r = std::get_if<SmoothRampData>(&data_)) out = {r->z_i, r->z_f};
  if (auto* p = std::get_if<PiecewiseData>(&data_)) {
    const auto& segs = *p->segments;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      for (double b : segs[i].profile.breakpoints()) {
        if (b > segs[i].begin && b < segs[i].end) out.push_back(b);
      }
      if (i + 1 < segs.size()) out.push_back(segs[i].end);
    }
    std::sort(out.begin(), out.end());
  }
  return out;
}

inline std::vector<IntegrationSegment> FieldProfile::integration_segments(double lo,
                                                                          double hi) const {
  std::vector<IntegrationSegment> out;
  if (!(lo < hi)) return out;
  if (auto* p = std::get_if<PiecewiseData>(&data_)) {
    for (const auto& s : *p->segments) {
      const double a = std::max(lo, s.begin);
      const double b = std::min(hi, s.end);
      if (b > a) {
        auto sub = s.profile.integration_segments(a, b);
        out.insert(out.end(), sub.begin(), sub.end());
      }
    }
    return out;
  }
  double a = lo;
  for (double b : breakpoints()) {
    if (b > a && b < hi) {
      out.push_back({a, b, this});
      a = b;
    }
  }
  out.push_back({a, hi, this});
  return out;
}

inline double FieldProfile::peak_abs_omega(double lo, double hi) const {
  return std::visit(
      [&](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, UniformData>) {
          return std::abs(d.omega);
        } else if constexpr (std::is_same_v<D, FreeData>) {
          return 0.0;
        } else if constexpr (std::is_same_v<D, GlaserData>) {
          const double zc = std::clamp(d.c, lo, hi);
          return std::abs(omega(zc));
        } else if constexpr (std::is_same_v<D, LinearRampData> ||
                             std::is_same_v<D, SmoothRampData>) {
          return std::max(std::abs(omega(lo)), std::abs(omega(hi)));
        } else if constexpr (std::is_same_v<D, PiecewiseData>) {
          double m = 0.0;
          for (const auto& s : *d.segments) {
            const double a = std::max(lo, s.begin);
            const double b = std::min(hi, s.end);
            if (b >= a) m = std::max(m, s.profile.peak_abs_omega(a, b));
          }
          return m;
        } else {
          double m = 0.0;
          const double a = std::max(lo, d.spline->front());
          const double b = std::min(hi, d.spline->back());
          for (int i = 0; i <= 4096; ++i) m = std::max(m, std::abs(omega(a + (b - a) * i / 4096.0)));
          return m;
        }
      },
      data_);
}

// Free-function spellings of the profile queries.
inline double omega_at(const FieldProfile& p, double z) { return p.omega(z); }
inline double domega_dz(const FieldProfile& p, double z) { return p.domega(z); }

struct FieldVector {
  double b_rho;  // T
  double b_z;    // T
};

/// Divergence-free paraxial reconstruction: B_z = B(z), B_rho = -(rho/2) dB/dz.
inline FieldVector field_vector(const FieldProfile& p, double rho, double z,
                                const PhysicalConstants& c = kCodata2018) {
  if (!(rho >= 0.0)) throw std::invalid_argument("field_vector: rho must be >= 0");
  const double to_tesla = 2.0 * c.electron_mass / c.elementary_charge;
  return {-0.5 * rho * to_tesla * p.domega(z), to_tesla * p.omega(z)};
}

}  // namespace vortexlens
