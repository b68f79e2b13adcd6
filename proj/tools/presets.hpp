#pragma once

// Built-in scenarios.  A file NAME.json in $VORTEXLENS_PRESET_DIR takes
// precedence over the built-in of the same name.

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace vortexlens::cli {

inline const std::map<std::string, std::string>& builtin_presets() {
  static const std::map<std::string, std::string> presets{
      {"fig1-abrupt", R"({
  "schema": 1,
  "name": "fig1-abrupt",
  "field": {"kind": "step", "z_m": 1e-4, "B_i_T": 0.1, "B_f_T": 0.2},
  "beam": {"speed_fraction_c": 0.02},
  "init": {"w0_m": "landau", "R0_m": "inf", "z0_m": 0.0},
  "mode": {"n": 0, "l": 0},
  "z_grid": {"start": 0.0, "stop": 6e-3, "count": 601},
  "outputs": [
    {"kind": "width", "path": "width.csv"},
    {"kind": "spectrum", "path": "spectrum.csv"},
    {"kind": "observables", "path": "observables.csv"}
  ]
})"},
      {"fig1-gradual", R"({
  "schema": 1,
  "name": "fig1-gradual",
  "field": {"kind": "adiabatic_ramp", "z_i_m": 1e-4, "B_i_T": 0.1, "B_f_T": 0.2,
            "adiabaticity": 0.01, "slope_multiplier": 1},
  "beam": {"speed_fraction_c": 0.02},
  "init": {"w0_m": "landau", "R0_m": "inf", "z0_m": 0.0},
  "mode": {"n": 0, "l": 0},
  "z_grid": {"start": 0.0, "stop": 0.07, "count": 1401},
  "outputs": [
    {"kind": "width", "path": "width.csv"},
    {"kind": "spectrum", "path": "spectrum.csv"},
    {"kind": "observables", "path": "observables.csv"}
  ]
})"},
      {"glaser-focus", R"({
  "schema": 1,
  "name": "glaser-focus",
  "field": {"kind": "glaser", "B0_T": 0.5, "a_m": 1e-3, "c_m": 5e-3},
  "beam": {"speed_fraction_c": 0.02},
  "init": {"w0_m": "glaser_matched", "R0_m": "inf", "z0_m": 5e-3},
  "mode": {"n": 0, "l": 1},
  "z_grid": {"start": 0.0, "stop": 1e-2, "count": 201},
  "outputs": [
    {"kind": "width", "path": "width.csv"},
    {"kind": "observables", "path": "observables.csv"},
    {"kind": "wavefunction", "path": "wavefunction_focus.csv", "options": {"z_m": 5e-3, "points": 81}}
  ]
})"},
      {"free-gouy", R"({
  "schema": 1,
  "name": "free-gouy",
  "field": {"kind": "free"},
  "beam": {"speed_fraction_c": 0.02},
  "init": {"w0_m": 2e-7, "R0_m": "inf", "z0_m": 0.0},
  "mode": {"n": 0, "l": 0},
  "z_grid": {"start": -6e-3, "stop": 6e-3, "count": 241},
  "outputs": [
    {"kind": "width", "path": "width.csv"},
    {"kind": "observables", "path": "observables.csv"},
    {"kind": "wavefunction", "path": "wavefunction_waist.csv", "options": {"z_m": 0.0, "points": 81}}
  ]
})"},
      {"landau", R"({
  "schema": 1,
  "name": "landau",
  "field": {"kind": "uniform", "B_T": 0.1},
  "beam": {"speed_fraction_c": 0.02},
  "init": {"w0_m": "landau", "R0_m": "inf", "z0_m": 0.0},
  "mode": {"n": 1, "l": 2},
  "z_grid": {"start": 0.0, "stop": 5e-3, "count": 101},
  "outputs": [
    {"kind": "width", "path": "width.csv"},
    {"kind": "observables", "path": "observables.csv"},
    {"kind": "wavefunction", "path": "wavefunction.csv",
     "options": {"z_m": 2e-3, "points": 81, "reference": {"n": 0, "l": 0}}},
    {"kind": "interference", "path": "interference.csv",
     "options": {"z_m": 2e-3, "points": 81, "reference": {"n": 0, "l": 0}}},
    {"kind": "spectrum", "path": "spectrum.csv"}
  ]
})"},
  };
  return presets;
}

inline std::optional<std::filesystem::path> user_preset_dir() {
  const char* d = std::getenv("VORTEXLENS_PRESET_DIR");
  if (d == nullptr || *d == '\0') return std::nullopt;
  return std::filesystem::path(d);
}

/// Preset JSON and the directory relative data paths resolve against.
inline std::pair<json, std::filesystem::path> load_preset(const std::string& name) {
  if (auto dir = user_preset_dir()) {
    const auto p = *dir / (name + ".json");
    if (std::filesystem::is_regular_file(p)) return {read_json_file(p), *dir};
  }
  const auto& b = builtin_presets();
  auto it = b.find(name);
  if (it == b.end()) throw ScenarioError("--preset: unknown preset \"" + name + "\"");
  return {json::parse(it->second), std::filesystem::current_path()};
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : builtin_presets()) names.push_back(k);
  if (auto dir = user_preset_dir(); dir && std::filesystem::is_directory(*dir)) {
    for (const auto& e : std::filesystem::directory_iterator(*dir)) {
      if (e.path().extension() == ".json") {
        const auto stem = e.path().stem().string();
        if (std::find(names.begin(), names.end(), stem) == names.end()) names.push_back(stem);
      }
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace vortexlens::cli
