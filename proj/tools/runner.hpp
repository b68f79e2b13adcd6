#pragma once

// Executes a validated Scenario: envelope, requested CSV outputs, invariant
// diagnostics and summary.json.  Exit codes: 0 ok, 1 invalid scenario,
// 2 solver failure or diagnostics above threshold.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "scenario.hpp"

namespace vortexlens::cli {

namespace fs = std::filesystem;

/// Shortest round-trip decimal form; inf/nan spelled out.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string_view> columns) {
    bool first = true;
    for (auto c : columns) {
      if (!first) text_ += ',';
      text_ += c;
      first = false;
    }
    text_ += '\n';
  }
  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) text_ += ',';
      text_ += format_number(v);
      first = false;
    }
    text_ += '\n';
  }
  const std::string& str() const noexcept { return text_; }

 private:
  std::string text_;
};

/// Writes through a temporary sibling and renames it into place.
inline void write_atomic(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(tmp.string() + ": cannot open for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.close();
    if (!f) throw std::runtime_error(tmp.string() + ": write failed");
  }
  fs::rename(tmp, p);
}

struct RunReport {
  int exit_code = 0;
  json summary;
};

namespace detail {

struct Diagnostics {
  double invariant_initial = 0.0;
  double invariant_drift = 0.0;
  double lz_drift = 0.0;
  double norm_drift = 0.0;
};

class Runner {
 public:
  Runner(const Scenario& s, const fs::path& out, std::ostream& log, bool quiet)
      : s_(s), out_(out), log_(log), quiet_(quiet) {}

  json run() {
    const auto zs = s_.z_grid();
    double lo = std::min(s_.init.z0, s_.z_start), hi = std::max(s_.init.z0, s_.z_stop);
    for (const auto& o : s_.outputs) {
      if (o.kind == OutputKind::Wavefunction || o.kind == OutputKind::Interference) {
        lo = std::min(lo, o.z);
        hi = std::max(hi, o.z);
      }
      if (o.kind == OutputKind::Spectrum && o.z_probe) {
        lo = std::min(lo, *o.z_probe);
        hi = std::max(hi, *o.z_probe);
      }
    }
    const EnvelopeSolution env = solve_envelope(s_.field, s_.beam, s_.init, {lo, hi}, s_.solve);
    Superposition sup;
    for (const auto& t : s_.terms) sup.terms.push_back({t.coefficient, {t.qn, env, s_.init.z0}});

    const auto traj = propagate_observables(s_.field, s_.beam, initial_state(sup, env), zs);
    std::vector<double> norms;
    norms.reserve(zs.size());
    for (double z : zs) norms.push_back(norm_at(sup, z));
    const Diagnostics d = diagnostics(traj, norms, env);

    json files = json::array();
    json spectra = json::object();
    for (const auto& o : s_.outputs) {
      std::string content;
      switch (o.kind) {
        case OutputKind::Width: content = width_csv(env, zs); break;
        case OutputKind::Observables: content = observables_csv(traj, norms, env); break;
        case OutputKind::Wavefunction: content = wavefunction_csv(o, sup, env, false); break;
        case OutputKind::Interference: content = wavefunction_csv(o, sup, env, true); break;
        case OutputKind::Spectrum: content = spectrum_csv(o, sup, env, spectra[o.path]); break;
      }
      write_atomic(out_ / o.path, content);
      files.push_back(o.path);
      if (!quiet_) log_ << "wrote " << (out_ / o.path).string() << "\n";
    }

    const bool ok = d.invariant_drift <= s_.thresholds.invariant_drift &&
                    d.lz_drift <= s_.thresholds.lz_drift && d.norm_drift <= s_.thresholds.norm_drift;
    json summary;
    summary["status"] = ok ? "ok" : "threshold_exceeded";
    summary["exit_code"] = ok ? 0 : 2;
    summary["envelope_backend"] = to_string(env.backend());
    summary["diagnostics"] = {{"invariant_initial_hbar", d.invariant_initial},
                              {"invariant_drift_rel", d.invariant_drift},
                              {"lz_drift_hbar", d.lz_drift},
                              {"norm_drift", d.norm_drift}};
    summary["outputs"] = files;
    if (!spectra.empty()) summary["spectra"] = spectra;
    return summary;
  }

 private:
  double zcol(double z) const { return s_.time_domain ? z / s_.beam.speed() : z; }
  const char* zlabel() const { return s_.time_domain ? "t_s" : "z_m"; }

  ObservableState initial_state(const Superposition& sup, const EnvelopeSolution& env) const {
    if (!s_.superposition) return single_mode_observables(s_.terms.front().qn, env, s_.z_start);
    const SuperpositionSlice sl(sup, s_.z_start);
    return quadrature_moments(sl, sl.max_width(), s_.field.omega(s_.z_start), s_.beam, s_.z_start);
  }

  double norm_at(const Superposition& sup, double z) const {
    if (!s_.superposition) return mode_norm(sup.terms.front().mode, z);
    const SuperpositionSlice sl(sup, z);
    int max_l = 0;
    for (const auto& t : s_.terms) max_l = std::max(max_l, t.qn.abs_l());
    return quadrature_norm(sl, radial_cutoff(sl.max_width(), sl.max_radial_order()),
                           static_cast<std::size_t>(std::max(64, 8 * max_l + 16)));
  }

  Diagnostics diagnostics(const std::vector<ObservableState>& traj, const std::vector<double>& norms,
                          const EnvelopeSolution& env) const {
    Diagnostics d;
    const double hbar = s_.beam.constants().hbar;
    d.invariant_initial = ermakov_lewis(traj.front(), env);
    const double lz0 = canonical_angular_momentum(traj.front(), s_.field, s_.beam.constants());
    for (std::size_t i = 0; i < traj.size(); ++i) {
      d.invariant_drift = std::max(
          d.invariant_drift, std::abs(ermakov_lewis(traj[i], env) - d.invariant_initial) / std::abs(d.invariant_initial));
      d.lz_drift = std::max(
          d.lz_drift, std::abs(canonical_angular_momentum(traj[i], s_.field, s_.beam.constants()) - lz0) / hbar);
      d.norm_drift = std::max(d.norm_drift, std::abs(norms[i] - 1.0));
    }
    return d;
  }

  std::string width_csv(const EnvelopeSolution& env, const std::vector<double>& zs) const {
    Csv csv{zlabel(), "w_m", "dw_dz", "R_m"};
    for (double z : zs) {
      const EnvelopeSample e = env.at(z);
      const double r = curvature_radius(env, z);
      // flat to working precision: print the slope as 0 to match R = inf
      csv.row({zcol(z), e.w, std::isinf(r) ? 0.0 : e.dw, r});
    }
    return csv.str();
  }

  std::string observables_csv(const std::vector<ObservableState>& traj, const std::vector<double>& norms,
                              const EnvelopeSolution& env) const {
    Csv csv{zlabel(), "t_perp_J", "rho2_m2", "l_mech_Js", "g_perp_Js", "lz_canonical_Js", "invariant_hbar", "norm"};
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const auto& t = traj[i];
      csv.row({zcol(t.z), t.t_perp, t.rho2, t.l_mech, t.g_perp,
               canonical_angular_momentum(t, s_.field, s_.beam.constants()), ermakov_lewis(t, env), norms[i]});
    }
    return csv.str();
  }

  std::string wavefunction_csv(const OutputSpec& o, const Superposition& sup, const EnvelopeSolution& env,
                               bool interference) const {
    const SuperpositionSlice chi(sup, o.z);
    const double half = o.half_extent > 0.0 ? o.half_extent : 6.0 * chi.max_width();
    const Grid2D grid = Grid2D::square(half, o.points);
    std::optional<ModeSlice> ref;
    if (o.reference) ref.emplace(ModeSpec{*o.reference, env, s_.init.z0}, o.z);
    Csv csv = interference ? Csv{"x_m", "y_m", "re_i", "im_i", "abs_i", "phase_rad"}
                           : Csv{"x_m", "y_m", "re_chi", "im_chi", "abs2", "phase_rad"};
    for (std::size_t j = 0; j < grid.ny; ++j) {
      for (std::size_t i = 0; i < grid.nx; ++i) {
        const double x = grid.x(i), y = grid.y(j);
        const double rho = std::hypot(x, y), phi = std::atan2(y, x);
        const cplx v = chi(rho, phi);
        const cplx r = ref ? (*ref)(rho, phi) : cplx(1.0, 0.0);
        const cplx p = v * std::conj(r);
        if (interference) {
          csv.row({x, y, p.real(), p.imag(), std::abs(p), std::arg(p)});
        } else {
          csv.row({x, y, v.real(), v.imag(), std::norm(v), std::arg(p)});
        }
      }
    }
    return csv.str();
  }

  std::string spectrum_csv(const OutputSpec& o, const Superposition& sup, const EnvelopeSolution& env,
                           json& info) const {
    const double zp = o.z_probe ? *o.z_probe
                                : first_width_extremum(env, o.probe_after, s_.z_stop).value_or(o.probe_after);
    const double omega_f = s_.field.omega(zp);
    if (omega_f == 0.0) {
      throw ScenarioError(o.key + ".options.z_probe_m: the field vanishes at the probe plane (z = " +
                          format_number(zp) + " m)");
    }
    std::map<int, Superposition> by_l;
    for (const auto& t : sup.terms) by_l[t.mode.qn.l].terms.push_back(t);
    Csv csv{"n", "l", "re_c", "im_c", "abs_c_squared"};
    json residuals = json::object();
    for (const auto& [l, part] : by_l) {
      const double amp = std::sqrt(part.coefficient_norm2());
      const SuperpositionSlice sl(part, zp);
      DecomposeOptions opt;
      opt.n_max = o.n_max;
      const auto sp = decompose_radial([&](double rho) { return sl(rho, 0.0) / amp; }, sl.max_width(),
                                       sl.max_radial_order(), l, omega_f, s_.beam, opt);
      for (int n = 0; n <= sp.n_max(); ++n) {
        const cplx c = amp * sp.coefficients[static_cast<std::size_t>(n)];
        csv.row({static_cast<double>(n), static_cast<double>(l), c.real(), c.imag(), std::norm(c)});
      }
      residuals[std::to_string(l)] = sp.residual;
    }
    info = {{"z_probe_m", zp}, {"omega_f_rad_s", omega_f}, {"residual_by_l", residuals}};
    return csv.str();
  }

  const Scenario& s_;
  fs::path out_;
  std::ostream& log_;
  bool quiet_;
};

}  // namespace detail

/// Runs the scenario and always writes out/summary.json.  ScenarioError
/// (exit 1) and IO errors propagate only if summary.json cannot be written.
inline RunReport run_scenario(const Scenario& s, const fs::path& out, std::ostream& log, bool quiet = false) {
  for (const auto& w : s.warnings) log << "warning: " << w << "\n";
  json summary;
  int code = 0;
  try {
    summary = detail::Runner(s, out, log, quiet).run();
    code = summary["exit_code"].get<int>();
  } catch (const ScenarioError& e) {
    summary = {{"status", "invalid"}, {"exit_code", 1}, {"error", e.what()}};
    code = 1;
  } catch (const SolverError& e) {
    summary = {{"status", "solver_failure"}, {"exit_code", 2}, {"error", e.what()}};
    code = 2;
  } catch (const BasisTooSmall& e) {
    summary = {{"status", "solver_failure"}, {"exit_code", 2}, {"error", e.what()}};
    code = 2;
  } catch (const DomainError& e) {
    summary = {{"status", "solver_failure"}, {"exit_code", 2}, {"error", e.what()}};
    code = 2;
  } catch (const OutOfDomain& e) {
    summary = {{"status", "solver_failure"}, {"exit_code", 2}, {"error", e.what()}};
    code = 2;
  }
  summary["schema"] = 1;
  summary["scenario"] = s.name;
  summary["time_domain"] = s.time_domain;
  summary["warnings"] = s.warnings;
  summary["thresholds"] = {{"invariant_drift", s.thresholds.invariant_drift},
                           {"lz_drift", s.thresholds.lz_drift},
                           {"norm_drift", s.thresholds.norm_drift}};
  write_atomic(out / "summary.json", summary.dump(2) + "\n");
  if (code != 0 && summary.contains("error")) log << "error: " << summary["error"].get<std::string>() << "\n";
  if (code == 2 && summary["status"] == "threshold_exceeded") log << "error: diagnostics above threshold (see summary.json)\n";
  return {code, summary};
}

}  // namespace vortexlens::cli
