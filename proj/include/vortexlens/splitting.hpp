#pragma once

// Projection of a propagated beam onto the Landau modes of the asymptotic
// field, and the ramp experiment that turns one Landau mode into several.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <valarray>
#include <vector>

#include "vortexlens/constants.hpp"
#include "vortexlens/errors.hpp"
#include "vortexlens/fields.hpp"
#include "vortexlens/lensing.hpp"
#include "vortexlens/modes.hpp"
#include "vortexlens/quadrature.hpp"

namespace vortexlens {

struct ModeSpectrum {
  int l = 0;
  std::vector<cplx> coefficients;  // indexed by n'
  double residual = 0.0;           // 1 - sum |c|^2

  int n_max() const noexcept { return static_cast<int>(coefficients.size()) - 1; }
  double weight(int n) const { return std::norm(coefficients.at(static_cast<std::size_t>(n))); }
  double total_weight() const {
    double s = 0.0;
    for (const auto& c : coefficients) s += std::norm(c);
    return s;
  }
};

/// Radial part of the (n, l) Landau mode of Omega (flat phase, theta = 0).
inline double landau_radial(int n, int l, double omega, double rho,
                            const PhysicalConstants& c = kCodata2018) {
  const double w = landau_width(omega, c);
  const QuantumNumbers qn{n, l};
  const int al = qn.abs_l();
  const double rw = rho / w;
  return normalization(qn) / w * std::pow(rw, al) * assoc_laguerre(n, al, 2.0 * rw * rw) *
         std::exp(-rw * rw);
}

struct DecomposeOptions {
  int n_max = 32;
  /// n_max doubles on insufficient residual until this limit.
  int n_max_limit = kMaxRadialIndex;
  double residual_tol = 1e-6;
  /// Radial truncation; 0 derives it from the widths involved.
  double rho_max = 0.0;
  double rtol = 1e-13;
};

/// c_n' = 2 pi int f_n'(rho) f(rho) rho d rho for a field chi = f(rho) e^{i l phi}.
/// `width_hint` and `order_hint` (n+|l| of the input) fix the truncation radius.
template <class Radial>
ModeSpectrum decompose_radial(const Radial& f, double width_hint, int order_hint, int l,
                              double omega_f, const BeamParams& beam,
                              const DecomposeOptions& opt = {}) {
  if (omega_f == 0.0) throw DomainError("decompose_into_landau: omega_f must be nonzero");
  if (opt.n_max < 0 || opt.n_max > kMaxRadialIndex) {
    throw std::invalid_argument("decompose_into_landau: n_max out of range");
  }
  const auto& pc = beam.constants();
  const double wf = landau_width(omega_f, pc);
  const int al = l < 0 ? -l : l;

  int n_max = opt.n_max;
  for (;;) {
    const double rho_max =
        opt.rho_max > 0.0
            ? opt.rho_max
            : std::max(radial_cutoff(width_hint, order_hint), radial_cutoff(wf, n_max + al));
    std::vector<double> norms(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) norms[static_cast<std::size_t>(n)] = normalization({n, l});

    auto integrand = [&](double rho) {
      std::valarray<cplx> out(static_cast<std::size_t>(n_max) + 1);
      const double rw = rho / wf;
      const double x = 2.0 * rw * rw;
      const double common = std::pow(rw, al) * std::exp(-rw * rw) / wf;
      if (common == 0.0) return out;
      const cplx val = f(rho) * (2.0 * std::numbers::pi * rho * common);
      const auto lag = assoc_laguerre_all(n_max, al, x);
      for (std::size_t n = 0; n < out.size(); ++n) out[n] = val * (norms[n] * lag[n]);
      return out;
    };
    QuadratureOptions qo;
    qo.rtol = opt.rtol;
    qo.atol = 1e-15;
    const std::valarray<cplx> c = integrate_or_throw(integrand, 0.0, rho_max, qo);

    ModeSpectrum s;
    s.l = l;
    s.coefficients.assign(std::begin(c), std::end(c));
    s.residual = 1.0 - s.total_weight();
    if (s.residual <= opt.residual_tol) return s;
    if (n_max >= opt.n_max_limit) {
      throw BasisTooSmall("decompose_into_landau: residual " + std::to_string(s.residual) +
                              " exceeds tolerance at n_max = " + std::to_string(n_max),
                          s.residual);
    }
    n_max = std::min(2 * std::max(n_max, 1), opt.n_max_limit);
  }
}

/// Decomposes mode `m` evaluated at z_probe into Landau modes of omega_f.
inline ModeSpectrum decompose_into_landau(const ModeSpec& m, double z_probe, double omega_f,
                                          const DecomposeOptions& opt = {}) {
  const ModeSlice slice(m, z_probe);
  return decompose_radial([&](double rho) { return slice(rho, 0.0); }, slice.width(),
                          m.qn.n + m.qn.abs_l(), m.qn.l, omega_f, m.envelope.beam(), opt);
}

/// <Landau(n', l'; omega_f) | chi> with a full 2D quadrature (no azimuthal
/// shortcut), so that selection-rule violations would show up.
template <class Sampler>
cplx project_onto_landau(const Sampler& chi, double width_hint, const QuantumNumbers& target,
                         double omega_f, const BeamParams& beam, std::size_t azimuthal_points = 64,
                         double rtol = 1e-12) {
  const auto& pc = beam.constants();
  const double wf = landau_width(omega_f, pc);
  const double rho_max =
      std::max(radial_cutoff(width_hint, target.abs_l() + 2), radial_cutoff(wf, target.n + target.abs_l()));
  auto basis = [&](double rho, double phi) {
    return phasor(landau_radial(target.n, target.l, omega_f, rho, pc), target.l * phi);
  };
  return inner_product(basis, chi, rho_max, azimuthal_points, rtol);
}

/// True when the matched width differs from the asymptotic Landau width,
/// i.e. g_i(0)/|Omega_i| != g_f(0)/|Omega_f| beyond a relative 1e-9.
inline bool splitting_criterion(double g_i0, double g_f0, double omega_i, double omega_f) {
  if (omega_i == 0.0 || omega_f == 0.0) {
    throw std::invalid_argument("splitting_criterion: omegas must be nonzero");
  }
  if (!(g_i0 > 0.0) || !(g_f0 > 0.0)) {
    throw std::invalid_argument("splitting_criterion: g values must be positive");
  }
  const double a = g_i0 / std::abs(omega_i), b = g_f0 / std::abs(omega_f);
  return std::abs(a - b) > 1e-9 * std::max(a, b);
}

/// Width representation w^2 = (2 hbar/(m|Omega_i|)) g_i for z < 0 and
/// w_f^2(z) g_f(z) for z > 0, where w_f is the uniform-field solution for
/// Omega_f with constants (w0, R0) chosen to make w and w' continuous at 0.
struct ConvenientRepresentation {
  double omega_i = 0.0;
  double omega_f = 0.0;
  std::function<double(double)> g_i, dg_i, g_f, dg_f;
  BeamParams beam;

  ConvenientRepresentation(double oi, double of, std::function<double(double)> gi,
                           std::function<double(double)> dgi, std::function<double(double)> gf,
                           std::function<double(double)> dgf, BeamParams b)
      : omega_i(oi), omega_f(of), g_i(std::move(gi)), dg_i(std::move(dgi)), g_f(std::move(gf)),
        dg_f(std::move(dgf)), beam(b) {
    if (omega_i == 0.0 || omega_f == 0.0) {
      throw std::invalid_argument("convenient representation: omegas must be nonzero");
    }
    if (!(g_i(0.0) > 0.0) || !(g_f(0.0) > 0.0)) {
      throw std::invalid_argument("convenient representation: g(0) must be positive");
    }
  }

  static ConvenientRepresentation abrupt(double oi, double of, const BeamParams& b) {
    auto one = [](double) { return 1.0; };
    auto zero = [](double) { return 0.0; };
    return {oi, of, one, zero, one, zero, b};
  }

  double landau_w2_initial() const {
    const double w = landau_width(omega_i, beam.constants());
    return w * w;
  }

  /// Matching constants for the z > 0 branch.
  EnvelopeInit matched() const {
    const double w0sq = landau_w2_initial() * g_i(0.0) / g_f(0.0);
    const double den = dg_i(0.0) / g_i(0.0) - dg_f(0.0) / g_f(0.0);
    return {0.0, std::sqrt(w0sq),
            den == 0.0 ? CurvatureRadius::flat() : CurvatureRadius::finite(2.0 / den)};
  }

  bool splits() const { return splitting_criterion(g_i(0.0), g_f(0.0), omega_i, omega_f); }

  double width_squared(double z) const {
    if (z < 0.0) return landau_w2_initial() * g_i(z);
    const double wf = analytic_constant_width(omega_f, beam, matched(), z);
    return wf * wf * g_f(z);
  }

  /// |Omega_implied^2 - Omega(z)^2| / max(Omega_i^2, Omega_f^2), where
  /// Omega_implied^2 = 4 hbar^2/(m^2 w^4) - v^2 w''/w with w'' by a
  /// fourth-order central difference of step h on one side of z = 0.
  double lensing_residual(const FieldProfile& field, double z, double h) const {
    if ((z < 0.0) != (z - 2.0 * h < 0.0) || (z < 0.0) != (z + 2.0 * h < 0.0)) {
      throw std::invalid_argument("lensing_residual: stencil straddles the matching plane");
    }
    auto w = [&](double x) { return std::sqrt(width_squared(x)); };
    const double w0 = w(z);
    const double ddw =
        (-w(z + 2 * h) + 16 * w(z + h) - 30 * w0 + 16 * w(z - h) - w(z - 2 * h)) / (12 * h * h);
    const auto& pc = beam.constants();
    const double v = beam.speed();
    const double q = 2.0 * pc.hbar / (pc.electron_mass * w0 * w0);
    const double implied = q * q - v * v * ddw / w0;
    const double om = field.omega(z);
    const double ref = std::max(omega_i * omega_i, omega_f * omega_f);
    return std::abs(implied - om * om) / ref;
  }
};

namespace detail {

inline double golden_extremum(const std::function<double(double)>& f, double a, double b,
                              bool maximise) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  auto val = [&](double x) { return maximise ? -f(x) : f(x); };
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = val(c), fd = val(d);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(std::abs(a), std::abs(b)) + 1e-300;
       ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = val(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = val(d);
    }
  }
  return f(0.5 * (a + b));
}

}  // namespace detail

/// Period of w^2 oscillations in a uniform field: pi v / |Omega|.
inline double width_oscillation_period(double omega, const BeamParams& beam) {
  if (omega == 0.0) throw DomainError("width oscillation period undefined for Omega = 0");
  return std::numbers::pi * beam.speed() / std::abs(omega);
}

/// (max w^2 - min w^2) / mean w^2 over [lo, hi]; the mean is the integral
/// average.  The window must lie in a uniform-field region and span at least
/// one oscillation period.
inline double width_oscillation_metric(const EnvelopeSolution& env, ZInterval window,
                                       std::size_t samples_per_period = 64) {
  const double om = env.field().omega(window.lo);
  if (std::abs(env.field().omega(window.hi) - om) > 1e-12 * std::abs(om) ||
      env.field().peak_abs_omega(window.lo, window.hi) > std::abs(om) * (1.0 + 1e-12)) {
    throw std::invalid_argument("width_oscillation_metric: window is not in a uniform region");
  }
  const double period = width_oscillation_period(om, env.beam());
  if (window.length() < period * (1.0 - 1e-12)) {
    throw std::invalid_argument("width_oscillation_metric: window shorter than one period (" +
                                std::to_string(period) + " m)");
  }
  auto w2 = [&](double z) {
    const double w = env.width(z);
    return w * w;
  };
  const std::size_t n = std::max<std::size_t>(
      16, static_cast<std::size_t>(std::ceil(window.length() / period * samples_per_period)));
  std::vector<double> zs(n + 1), vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    zs[i] = window.lo + window.length() * static_cast<double>(i) / static_cast<double>(n);
    vals[i] = w2(zs[i]);
  }
  const auto imax = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  const auto imin = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  auto bracket = [&](std::size_t i) {
    return std::pair{zs[i == 0 ? 0 : i - 1], zs[std::min(i + 1, n)]};
  };
  const auto [a1, b1] = bracket(imax);
  const auto [a2, b2] = bracket(imin);
  const double hi = std::max(vals[imax], detail::golden_extremum(w2, a1, b1, true));
  const double lo = std::min(vals[imin], detail::golden_extremum(w2, a2, b2, false));

  QuadratureOptions qo;
  qo.rtol = 1e-10;
  std::vector<double> breaks;
  const auto nb = static_cast<std::size_t>(std::ceil(window.length() / period)) * 4;
  for (std::size_t i = 0; i <= nb; ++i) {
    breaks.push_back(window.lo + window.length() * static_cast<double>(i) / static_cast<double>(nb));
  }
  const double mean = integrate_or_throw(w2, breaks, qo) / window.length();
  return (hi - lo) / mean;
}

/// First z in (z_start, z_max] where dw/dz changes sign.  The scan step is
/// 1/64 of the local oscillation period.
inline std::optional<double> first_width_extremum(const EnvelopeSolution& env, double z_start,
                                                  double z_max) {
  const double om = env.field().omega(z_start);
  const double step = om != 0.0 ? width_oscillation_period(om, env.beam()) / 64.0
                                : (z_max - z_start) / 1000.0;
  double a = z_start;
  double sa = env.slope(a);
  for (double b = std::min(a + step, z_max); a < z_max; b = std::min(a + step, z_max)) {
    const double sb = env.slope(b);
    if (sa == 0.0 && a == z_start) {
      // Extremum exactly at the start; look for the next one.
    } else if (sb == 0.0) {
      return b;
    } else if ((sa < 0.0) != (sb < 0.0) && sa != 0.0) {
      double lo = a, hi = b, slo = sa;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::abs(hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double sm = env.slope(mid);
        if (sm == 0.0) return mid;
        if ((sm < 0.0) == (slo < 0.0)) {
          lo = mid;
          slo = sm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    a = b;
    sa = sb;
  }
  return std::nullopt;
}

/// Largest |v Omega'| / Omega^2 on [lo, hi], by dense sampling.
inline double adiabaticity(const FieldProfile& field, const BeamParams& beam, double lo, double hi,
                           std::size_t samples = 20001) {
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double z = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double om = field.omega(z);
    if (om == 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(beam.speed() * field.domega(z)) / (om * om));
  }
  return worst;
}

/// Shortest smoothstep ramp from omega_i to omega_f with |v Omega'| <= eps Omega^2.
inline double adiabatic_ramp_length(double omega_i, double omega_f, double speed, double eps) {
  if (omega_i == 0.0 || omega_f == 0.0 || (omega_i > 0.0) != (omega_f > 0.0)) {
    throw std::invalid_argument("adiabatic_ramp_length: omegas must be nonzero, same sign");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("adiabatic_ramp_length: eps must be positive");
  const double d = omega_f - omega_i;
  auto need = [&](double s) {
    const double om = omega_i + d * detail::smoothstep(s);
    return speed * std::abs(d) * detail::smoothstep_slope(s) / (eps * om * om);
  };
  constexpr int n = 4000;
  int best = 0;
  double best_v = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double v = need(static_cast<double>(i) / n);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  const double a = std::max(0, best - 1) / static_cast<double>(n);
  const double b = std::min(n, best + 1) / static_cast<double>(n);
  return std::max(best_v, detail::golden_extremum(need, a, b, true));
}

/// Uniform Omega_i, a transition on [z_i, z_f] and uniform Omega_f beyond,
/// entered by a Landau mode of Omega_i.
struct RampScenario {
  std::string name;
  FieldProfile field;
  double z_i = 0.0;
  double z_f = 0.0;  // equals z_i for an abrupt step
  double omega_i = 0.0;
  double omega_f = 0.0;
  QuantumNumbers qn;
  BeamParams beam;
  double z0 = 0.0;  // launch plane, z0 <= z_i

  void validate() const {
    if (omega_i == 0.0 || omega_f == 0.0) {
      throw std::invalid_argument("ramp scenario: omegas must be nonzero");
    }
    if (z_f < z_i || z0 > z_i) throw std::invalid_argument("ramp scenario: need z0 <= z_i <= z_f");
    qn.validate();
  }

  EnvelopeInit initial_envelope() const {
    return {z0, landau_width(omega_i, beam.constants()), CurvatureRadius::flat()};
  }

  static RampScenario abrupt(std::string name, double z_step, double oi, double of,
                             QuantumNumbers qn, const BeamParams& beam, double z0 = 0.0) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    auto field = FieldProfile::piecewise(
        {{-inf, z_step, FieldProfile::uniform(oi)}, {z_step, inf, FieldProfile::uniform(of)}});
    return {std::move(name), field, z_step, z_step, oi, of, qn, beam, z0};
  }

  static RampScenario smooth(std::string name, double z_i, double length, double oi, double of,
                             QuantumNumbers qn, const BeamParams& beam, double z0 = 0.0) {
    return {std::move(name), FieldProfile::smooth_ramp(z_i, z_i + length, oi, of),
            z_i, z_i + length, oi, of, qn, beam, z0};
  }
};

struct RampResult {
  RampScenario scenario;
  EnvelopeSolution envelope;
  double z_probe = 0.0;
  double z_reprobe = 0.0;
  ModeSpectrum spectrum;
  ModeSpectrum reprobe;
  ZInterval metric_window;
  double metric = 0.0;
};

struct RampRunOptions {
  /// Uniform-field stretch after z_f, in oscillation periods of Omega_f.
  int periods_after = 8;
  /// Metric window length in periods (starts at z_f).
  int metric_periods = 4;
  DecomposeOptions decompose{};
  SolveOptions solve{};
};

inline RampResult run_ramp(const RampScenario& sc, const RampRunOptions& opt = {}) {
  sc.validate();
  const double period = width_oscillation_period(sc.omega_f, sc.beam);
  const double z_end = sc.z_f + opt.periods_after * period;
  RampResult r{sc,
               solve_envelope(sc.field, sc.beam, sc.initial_envelope(), {sc.z0, z_end}, opt.solve),
               0.0, 0.0, {}, {}, {}, 0.0};
  const auto zp = first_width_extremum(r.envelope, sc.z_f, z_end);
  r.z_probe = zp.value_or(sc.z_f);
  r.z_reprobe = r.z_probe + 0.25 * period;
  const ModeSpec mode{sc.qn, r.envelope, sc.z0};
  r.spectrum = decompose_into_landau(mode, r.z_probe, sc.omega_f, opt.decompose);
  r.reprobe = decompose_into_landau(mode, r.z_reprobe, sc.omega_f, opt.decompose);
  r.metric_window = {sc.z_f, sc.z_f + opt.metric_periods * period};
  r.metric = width_oscillation_metric(r.envelope, r.metric_window);
  return r;
}

struct Fig1Config {
  double B_i = 0.1;  // T
  double B_f = 0.2;  // T
  double speed_fraction = 0.02;
  double z_i = 1e-4;  // m
  double adiabaticity = 0.01;
  std::vector<double> slope_multipliers{1.0, 2.0, 4.0};
  bool include_abrupt = true;
  QuantumNumbers qn{0, 0};
  RampRunOptions run{};
};

/// Gradual smoothstep ramps (base length from the adiabaticity bound, then
/// shortened by each slope multiplier) followed by the abrupt step.
inline std::vector<RampResult> run_fig1(const Fig1Config& cfg = {}) {
  const auto beam = BeamParams::from_speed_fraction(cfg.speed_fraction);
  const auto& pc = beam.constants();
  const double oi = larmor_from_B(cfg.B_i, pc), of = larmor_from_B(cfg.B_f, pc);
  const double base = adiabatic_ramp_length(oi, of, beam.speed(), cfg.adiabaticity);
  std::vector<RampResult> out;
  for (double mult : cfg.slope_multipliers) {
    if (!(mult > 0.0)) throw std::invalid_argument("run_fig1: slope multipliers must be positive");
    const std::string name = "smooth_x" + std::to_string(static_cast<int>(std::lround(mult)));
    out.push_back(run_ramp(RampScenario::smooth(name, cfg.z_i, base / mult, oi, of, cfg.qn, beam),
                           cfg.run));
  }
  if (cfg.include_abrupt) {
    out.push_back(run_ramp(RampScenario::abrupt("abrupt", cfg.z_i, oi, of, cfg.qn, beam), cfg.run));
  }
  return out;
}

}  // namespace vortexlens
