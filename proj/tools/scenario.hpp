#pragma once

// Scenario files (JSON, "schema": 1), built-in presets and dotted-path
// overrides.  Every validation error names the offending key path.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "vortexlens/vortexlens.hpp"

namespace vortexlens::cli {

using nlohmann::json;

/// Parse or validation failure (exit code 1).
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputKind { Width, Observables, Wavefunction, Interference, Spectrum };

inline const char* to_string(OutputKind k) {
  switch (k) {
    case OutputKind::Width: return "width";
    case OutputKind::Observables: return "observables";
    case OutputKind::Wavefunction: return "wavefunction";
    case OutputKind::Interference: return "interference";
    case OutputKind::Spectrum: return "spectrum";
  }
  return "?";
}

struct OutputSpec {
  OutputKind kind = OutputKind::Width;
  std::string path;
  std::string key;  // "outputs.<i>", for messages
  // wavefunction / interference
  double z = 0.0;
  double half_extent = 0.0;  // 0: six envelope widths
  std::size_t points = 121;
  std::optional<QuantumNumbers> reference;
  // spectrum
  std::optional<double> z_probe;  // empty: first width extremum after probe_after
  double probe_after = 0.0;
  int n_max = 32;
};

struct Thresholds {
  double invariant_drift = 1e-6;  // max |I - I0| / I0
  double lz_drift = 1e-6;         // max |Lz - Lz0| / hbar
  double norm_drift = 1e-6;       // max |norm - 1|
};

struct ModeTerm {
  QuantumNumbers qn;
  cplx coefficient{1.0, 0.0};
};

struct Scenario {
  std::string name = "scenario";
  FieldProfile field = FieldProfile::free();
  BeamParams beam = BeamParams::from_speed_fraction(0.02);
  EnvelopeInit init;
  std::vector<ModeTerm> terms;
  bool superposition = false;
  double z_start = 0.0, z_stop = 0.0;
  std::size_t z_count = 2;
  std::vector<OutputSpec> outputs;
  bool time_domain = false;
  Thresholds thresholds;
  SolveOptions solve;
  std::vector<std::string> warnings;

  std::vector<double> z_grid() const {
    std::vector<double> z(z_count);
    for (std::size_t i = 0; i < z_count; ++i) {
      z[i] = i + 1 == z_count ? z_stop
                              : z_start + (z_stop - z_start) * static_cast<double>(i) /
                                              static_cast<double>(z_count - 1);
    }
    return z;
  }
};

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ScenarioError(path + ": " + what);
}

inline void check_keys(const json& j, const std::string& path,
                       std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      fail(join(path, it.key()), "unknown key");
    }
  }
}

inline const json& require(const json& j, const std::string& path, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) fail(join(path, key), "required key missing");
  return *it;
}

/// Finite number, or +-inf when spelled "inf" / "-inf" and allowed.
inline double as_number(const json& v, const std::string& path, bool allow_inf = false) {
  if (v.is_number()) {
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
  }
  if (allow_inf && v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  fail(path, allow_inf ? "expected a number or \"inf\"" : "expected a number");
}

inline double number(const json& j, const std::string& path, const std::string& key) {
  return as_number(require(j, path, key), join(path, key));
}

inline double number_or(const json& j, const std::string& path, const std::string& key, double def) {
  return j.contains(key) ? as_number(j.at(key), join(path, key)) : def;
}

inline double positive(const json& j, const std::string& path, const std::string& key) {
  const double x = number(j, path, key);
  if (!(x > 0.0)) fail(join(path, key), "must be > 0");
  return x;
}

inline long long integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<long long>();
}

/// Angular frequency from either "<stem>_T" (tesla) or "<stem>_rad_s".
inline double larmor(const json& j, const std::string& path, const std::string& stem,
                     const PhysicalConstants& c) {
  const bool has_b = j.contains(stem + "_T"), has_o = j.contains(stem + "_rad_s");
  if (has_b == has_o) {
    fail(join(path, stem + "_T"), "give exactly one of " + stem + "_T or " + stem + "_rad_s");
  }
  return has_b ? larmor_from_B(number(j, path, stem + "_T"), c) : number(j, path, stem + "_rad_s");
}

inline QuantumNumbers quantum_numbers(const json& j, const std::string& path,
                                      std::initializer_list<std::string_view> extra = {}) {
  std::vector<std::string_view> allowed{"n", "l"};
  allowed.insert(allowed.end(), extra.begin(), extra.end());
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      fail(join(path, it.key()), "unknown key");
    }
  }
  const long long n = integer(require(j, path, "n"), join(path, "n"));
  const long long l = integer(require(j, path, "l"), join(path, "l"));
  if (n < 0 || n > kMaxRadialIndex) {
    fail(join(path, "n"), "must be in [0, " + std::to_string(kMaxRadialIndex) + "]");
  }
  if (std::abs(l) > 1000) fail(join(path, "l"), "|l| too large");
  return {static_cast<int>(n), static_cast<int>(l)};
}

struct FieldInfo {
  FieldProfile profile;
  std::optional<std::pair<double, double>> glaser;  // (omega0, a)
};

inline FieldInfo parse_field(const json& j, const std::string& path, const BeamParams& beam,
                             const std::filesystem::path& base) {
  const auto& c = beam.constants();
  if (!j.is_object()) fail(path, "expected an object");
  const json& kind_j = require(j, path, "kind");
  if (!kind_j.is_string()) fail(join(path, "kind"), "expected a string");
  const std::string kind = kind_j.get<std::string>();
  auto wrap = [&](auto f) -> FieldInfo {
    try {
      return f();
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  };
  if (kind == "free") {
    check_keys(j, path, {"kind"});
    return {FieldProfile::free(), std::nullopt};
  }
  if (kind == "uniform") {
    check_keys(j, path, {"kind", "B_T", "omega_rad_s"});
    return {FieldProfile::uniform(larmor(j, path, "B", c)), std::nullopt};
  }
  if (kind == "glaser") {
    check_keys(j, path, {"kind", "B0_T", "omega0_rad_s", "a_m", "c_m"});
    const double om0 = larmor(j, path, "B0", c), a = positive(j, path, "a_m");
    const double zc = number_or(j, path, "c_m", 0.0);
    return wrap([&] { return FieldInfo{FieldProfile::glaser(om0, a, zc), std::pair{om0, a}}; });
  }
  if (kind == "linear_ramp" || kind == "smooth_ramp") {
    check_keys(j, path, {"kind", "z_i_m", "z_f_m", "B_i_T", "B_f_T", "omega_i_rad_s", "omega_f_rad_s"});
    const double zi = number(j, path, "z_i_m"), zf = number(j, path, "z_f_m");
    if (!(zf > zi)) fail(join(path, "z_f_m"), "must be > z_i_m");
    const double oi = larmor(j, path, "B_i", c), of = larmor(j, path, "B_f", c);
    return {kind == "linear_ramp" ? FieldProfile::linear_ramp(zi, zf, oi, of)
                                  : FieldProfile::smooth_ramp(zi, zf, oi, of),
            std::nullopt};
  }
  if (kind == "step") {
    check_keys(j, path, {"kind", "z_m", "B_i_T", "B_f_T", "omega_i_rad_s", "omega_f_rad_s"});
    const double zs = number(j, path, "z_m");
    const double oi = larmor(j, path, "B_i", c), of = larmor(j, path, "B_f", c);
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {FieldProfile::piecewise(
                {{-inf, zs, FieldProfile::uniform(oi)}, {zs, inf, FieldProfile::uniform(of)}}),
            std::nullopt};
  }
  if (kind == "adiabatic_ramp") {
    // Smoothstep ramp just long enough for |v Omega'| <= eps Omega^2, then
    // shortened by slope_multiplier.
    check_keys(j, path, {"kind", "z_i_m", "B_i_T", "B_f_T", "omega_i_rad_s", "omega_f_rad_s",
                         "adiabaticity", "slope_multiplier"});
    const double zi = number(j, path, "z_i_m");
    const double oi = larmor(j, path, "B_i", c), of = larmor(j, path, "B_f", c);
    const double eps = number_or(j, path, "adiabaticity", 0.01);
    const double mult = number_or(j, path, "slope_multiplier", 1.0);
    if (!(eps > 0.0)) fail(join(path, "adiabaticity"), "must be > 0");
    if (!(mult > 0.0)) fail(join(path, "slope_multiplier"), "must be > 0");
    if (oi == 0.0 || of == 0.0 || (oi > 0.0) != (of > 0.0)) {
      fail(join(path, "B_f_T"), "adiabatic ramp needs nonzero fields of one sign");
    }
    const double len = adiabatic_ramp_length(oi, of, beam.speed(), eps) / mult;
    return {FieldProfile::smooth_ramp(zi, zi + len, oi, of), std::nullopt};
  }
  if (kind == "piecewise") {
    check_keys(j, path, {"kind", "segments"});
    const json& segs = require(j, path, "segments");
    if (!segs.is_array() || segs.empty()) fail(join(path, "segments"), "expected a nonempty array");
    std::vector<PiecewiseSegment> out;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string sp = join(path, "segments." + std::to_string(i));
      check_keys(segs[i], sp, {"from_m", "to_m", "field"});
      const double a = as_number(require(segs[i], sp, "from_m"), join(sp, "from_m"), true);
      const double b = as_number(require(segs[i], sp, "to_m"), join(sp, "to_m"), true);
      out.push_back({a, b, parse_field(require(segs[i], sp, "field"), join(sp, "field"), beam, base).profile});
    }
    return wrap([&] { return FieldInfo{FieldProfile::piecewise(std::move(out)), std::nullopt}; });
  }
  if (kind == "tabulated") {
    check_keys(j, path, {"kind", "csv_path", "z_m", "B_T", "omega_rad_s"});
    if (j.contains("csv_path")) {
      if (!j.at("csv_path").is_string()) fail(join(path, "csv_path"), "expected a string");
      std::filesystem::path p = j.at("csv_path").get<std::string>();
      if (p.is_relative()) p = base / p;
      try {
        return {FieldProfile::from_csv(p.string()), std::nullopt};
      } catch (const std::exception& e) {
        fail(join(path, "csv_path"), e.what());
      }
    }
    auto vec = [&](const std::string& key) {
      const json& a = require(j, path, key);
      if (!a.is_array()) fail(join(path, key), "expected an array");
      std::vector<double> v;
      for (std::size_t i = 0; i < a.size(); ++i) v.push_back(as_number(a[i], join(path, key + "." + std::to_string(i))));
      return v;
    };
    const auto z = vec("z_m");
    std::vector<double> om;
    if (j.contains("B_T")) {
      for (double b : vec("B_T")) om.push_back(larmor_from_B(b, c));
    } else {
      om = vec("omega_rad_s");
    }
    if (om.size() != z.size()) fail(join(path, "z_m"), "length differs from the field samples");
    return wrap([&] { return FieldInfo{FieldProfile::tabulated(z, om), std::nullopt}; });
  }
  fail(join(path, "kind"), "unknown field kind \"" + kind + "\"");
}

inline BeamParams parse_beam(const json& j, const std::string& path) {
  check_keys(j, path, {"speed_fraction_c", "kinetic_energy_eV"});
  const bool a = j.contains("speed_fraction_c"), b = j.contains("kinetic_energy_eV");
  if (a == b) fail(join(path, "speed_fraction_c"), "give exactly one of speed_fraction_c or kinetic_energy_eV");
  if (a) {
    const double f = positive(j, path, "speed_fraction_c");
    if (!(f < 1.0)) fail(join(path, "speed_fraction_c"), "must be < 1");
    return BeamParams::from_speed_fraction(f);
  }
  return BeamParams::from_kinetic_energy_eV(positive(j, path, "kinetic_energy_eV"));
}

inline OutputSpec parse_output(const json& j, const std::string& path, double z_default,
                               double probe_after_default) {
  check_keys(j, path, {"kind", "path", "options"});
  OutputSpec o;
  o.key = path;
  const json& k = require(j, path, "kind");
  const std::string kind = k.is_string() ? k.get<std::string>() : "";
  static const std::map<std::string, OutputKind, std::less<>> kinds{
      {"width", OutputKind::Width}, {"observables", OutputKind::Observables},
      {"wavefunction", OutputKind::Wavefunction}, {"interference", OutputKind::Interference},
      {"spectrum", OutputKind::Spectrum}};
  auto it = kinds.find(kind);
  if (it == kinds.end()) {
    fail(join(path, "kind"), "expected one of width, observables, wavefunction, interference, spectrum");
  }
  o.kind = it->second;
  const json& p = require(j, path, "path");
  if (!p.is_string() || p.get<std::string>().empty()) fail(join(path, "path"), "expected a nonempty string");
  o.path = p.get<std::string>();
  const std::filesystem::path fp(o.path);
  if (fp.is_absolute() || std::any_of(fp.begin(), fp.end(), [](const auto& s) { return s == ".."; })) {
    fail(join(path, "path"), "must be relative to the output directory without '..'");
  }
  if (o.path == "summary.json") fail(join(path, "path"), "summary.json is reserved");

  const json opts = j.contains("options") ? j.at("options") : json::object();
  const std::string op = join(path, "options");
  o.z = z_default;
  o.probe_after = probe_after_default;
  switch (o.kind) {
    case OutputKind::Width:
    case OutputKind::Observables:
      check_keys(opts, op, {});
      break;
    case OutputKind::Wavefunction:
    case OutputKind::Interference: {
      check_keys(opts, op, {"z_m", "half_extent_m", "points", "reference"});
      o.z = number_or(opts, op, "z_m", z_default);
      if (opts.contains("half_extent_m")) o.half_extent = positive(opts, op, "half_extent_m");
      if (opts.contains("points")) {
        const long long n = integer(opts.at("points"), join(op, "points"));
        if (n < 2 || n > 4001) fail(join(op, "points"), "must be in [2, 4001]");
        o.points = static_cast<std::size_t>(n);
      }
      if (opts.contains("reference")) o.reference = quantum_numbers(opts.at("reference"), join(op, "reference"));
      if (o.kind == OutputKind::Interference && !o.reference) fail(join(op, "reference"), "required key missing");
      break;
    }
    case OutputKind::Spectrum: {
      check_keys(opts, op, {"z_probe_m", "after_m", "n_max"});
      if (opts.contains("z_probe_m") && !(opts.at("z_probe_m").is_string() && opts.at("z_probe_m") == "auto")) {
        o.z_probe = as_number(opts.at("z_probe_m"), join(op, "z_probe_m"));
      }
      o.probe_after = number_or(opts, op, "after_m", probe_after_default);
      if (opts.contains("n_max")) {
        const long long n = integer(opts.at("n_max"), join(op, "n_max"));
        if (n < 0 || n > kMaxRadialIndex) fail(join(op, "n_max"), "must be in [0, 64]");
        o.n_max = static_cast<int>(n);
      }
      break;
    }
  }
  return o;
}

}  // namespace detail

/// Builds and validates a Scenario.  `base` resolves relative data paths.
inline Scenario parse_scenario(const json& j, const std::filesystem::path& base = ".") {
  using namespace detail;
  check_keys(j, "", {"schema", "name", "field", "beam", "init", "mode", "superposition", "z_grid",
                     "outputs", "time_domain", "thresholds", "solver"});
  const json& schema = require(j, "", "schema");
  if (!schema.is_number_integer() || schema.get<long long>() != 1) fail("schema", "only schema 1 is supported");

  Scenario s;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) fail("name", "expected a string");
    s.name = j.at("name").get<std::string>();
  }
  s.beam = parse_beam(require(j, "", "beam"), "beam");
  const FieldInfo fi = parse_field(require(j, "", "field"), "field", s.beam, base);
  s.field = fi.profile;

  const json& init = require(j, "", "init");
  check_keys(init, "init", {"w0_m", "R0_m", "z0_m"});
  s.init.z0 = number_or(init, "init", "z0_m", 0.0);
  const json& w0 = require(init, "init", "w0_m");
  if (w0.is_string() && w0 == "landau") {
    const double om = s.field.omega(s.init.z0);
    if (om == 0.0) fail("init.w0_m", "\"landau\" needs a nonzero field at z0_m");
    s.init.w0 = landau_width(om, s.beam.constants());
  } else if (w0.is_string() && w0 == "glaser_matched") {
    if (!fi.glaser) fail("init.w0_m", "\"glaser_matched\" needs field.kind = glaser");
    s.init.w0 = glaser_matched_width(fi.glaser->first, fi.glaser->second, s.beam);
  } else {
    s.init.w0 = as_number(w0, "init.w0_m");
    if (!(s.init.w0 > 0.0)) fail("init.w0_m", "must be > 0");
  }
  if (init.contains("R0_m")) {
    const double r = as_number(init.at("R0_m"), "init.R0_m", true);
    if (r == 0.0) fail("init.R0_m", "must be nonzero (use \"inf\" for a flat front)");
    s.init.R0 = std::isinf(r) ? CurvatureRadius::flat() : CurvatureRadius::finite(r);
  }

  const bool has_mode = j.contains("mode"), has_sup = j.contains("superposition");
  if (has_mode == has_sup) fail("mode", "give exactly one of mode or superposition");
  if (has_mode) {
    s.terms.push_back({quantum_numbers(j.at("mode"), "mode"), {1.0, 0.0}});
  } else {
    const json& sup = j.at("superposition");
    if (!sup.is_array() || sup.empty()) fail("superposition", "expected a nonempty array");
    s.superposition = true;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < sup.size(); ++i) {
      const std::string p = "superposition." + std::to_string(i);
      const QuantumNumbers qn = quantum_numbers(sup[i], p, {"re_c", "im_c"});
      const cplx c(number_or(sup[i], p, "re_c", 0.0), number_or(sup[i], p, "im_c", 0.0));
      for (const auto& t : s.terms) {
        if (t.qn.n == qn.n && t.qn.l == qn.l) fail(p, "duplicate (n, l)");
      }
      s.terms.push_back({qn, c});
      norm2 += std::norm(c);
    }
    if (!(norm2 > 0.0)) fail("superposition", "coefficients are all zero");
    if (std::abs(norm2 - 1.0) > 1e-12) {
      const double k = 1.0 / std::sqrt(norm2);
      for (auto& t : s.terms) t.coefficient *= k;
      std::ostringstream msg;
      msg.precision(17);
      msg << "superposition: coefficients normalized (sum |c|^2 was " << norm2 << ")";
      s.warnings.push_back(msg.str());
    }
  }

  const json& g = require(j, "", "z_grid");
  check_keys(g, "z_grid", {"start", "stop", "count"});
  s.z_start = number(g, "z_grid", "start");
  s.z_stop = number(g, "z_grid", "stop");
  if (!(s.z_start < s.z_stop)) fail("z_grid.stop", "must be > start");
  const long long count = integer(require(g, "z_grid", "count"), "z_grid.count");
  if (count < 2 || count > 10'000'000) fail("z_grid.count", "must be in [2, 1e7]");
  s.z_count = static_cast<std::size_t>(count);

  // Default probe region: after the last field breakpoint inside the grid.
  double after = s.z_start;
  for (double b : s.field.breakpoints()) {
    if (std::isfinite(b) && b >= s.z_start && b <= s.z_stop) after = std::max(after, b);
  }

  if (j.contains("outputs")) {
    const json& outs = j.at("outputs");
    if (!outs.is_array()) fail("outputs", "expected an array");
    for (std::size_t i = 0; i < outs.size(); ++i) {
      auto o = parse_output(outs[i], "outputs." + std::to_string(i), s.z_start, after);
      for (const auto& prev : s.outputs) {
        if (prev.path == o.path) fail(o.key + ".path", "duplicate output path");
      }
      s.outputs.push_back(std::move(o));
    }
  }

  if (j.contains("time_domain")) {
    if (!j.at("time_domain").is_boolean()) fail("time_domain", "expected true or false");
    s.time_domain = j.at("time_domain").get<bool>();
  }
  if (j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    check_keys(t, "thresholds", {"invariant_drift", "lz_drift", "norm_drift"});
    if (t.contains("invariant_drift")) s.thresholds.invariant_drift = positive(t, "thresholds", "invariant_drift");
    if (t.contains("lz_drift")) s.thresholds.lz_drift = positive(t, "thresholds", "lz_drift");
    if (t.contains("norm_drift")) s.thresholds.norm_drift = positive(t, "thresholds", "norm_drift");
  }
  if (j.contains("solver")) {
    const json& sv = j.at("solver");
    check_keys(sv, "solver", {"rtol", "atol", "max_steps", "force_numeric"});
    if (sv.contains("rtol")) s.solve.ode.rtol = positive(sv, "solver", "rtol");
    if (sv.contains("atol")) s.solve.ode.atol = positive(sv, "solver", "atol");
    if (sv.contains("max_steps")) {
      const long long m = integer(sv.at("max_steps"), "solver.max_steps");
      if (m < 1) fail("solver.max_steps", "must be >= 1");
      s.solve.ode.max_steps = static_cast<std::size_t>(m);
    }
    if (sv.contains("force_numeric")) {
      if (!sv.at("force_numeric").is_boolean()) fail("solver.force_numeric", "expected true or false");
      s.solve.force_numeric = sv.at("force_numeric").get<bool>();
    }
  }
  return s;
}

/// Applies `a.b.0.c=value`.  The value is read as JSON when it parses,
/// otherwise as a plain string.  Missing object keys are created.
inline void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ScenarioError("--set " + assignment + ": expected key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &root;
  std::size_t pos = 0;
  std::string walked;
  for (;;) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) throw ScenarioError(key + ": empty path component");
    walked = detail::join(walked, part);
    json* next = nullptr;
    if (node->is_array()) {
      char* end = nullptr;
      const unsigned long idx = std::strtoul(part.c_str(), &end, 10);
      if (*end != '\0' || idx >= node->size()) throw ScenarioError(walked + ": no such array element");
      next = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ScenarioError(walked + ": cannot descend into a scalar");
      next = &(*node)[part];
    }
    if (dot == std::string::npos) {
      *next = value;
      return;
    }
    node = next;
    pos = dot + 1;
  }
}

inline json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ScenarioError(p.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(p.string() + ": " + e.what());
  }
}

}  // namespace vortexlens::cli
