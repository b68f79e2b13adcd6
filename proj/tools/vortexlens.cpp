// Command-line front end: `vortexlens run`, `vortexlens presets`,
// `vortexlens show-preset`.

#include <iostream>

#include "CLI11.hpp"
#include "presets.hpp"
#include "runner.hpp"

namespace vl = vortexlens::cli;

namespace {

int do_run(const std::string& file, const std::string& preset, const std::vector<std::string>& sets,
           const std::string& out, bool quiet) {
  if (file.empty() == preset.empty()) {
    std::cerr << "error: give exactly one of a scenario file or --preset\n";
    return 1;
  }
  try {
    vl::json j;
    std::filesystem::path base;
    if (!file.empty()) {
      j = vl::read_json_file(file);
      base = std::filesystem::absolute(file).parent_path();
    } else {
      std::tie(j, base) = vl::load_preset(preset);
    }
    for (const auto& s : sets) vl::apply_override(j, s);
    const auto scenario = vl::parse_scenario(j, base);
    return vl::run_scenario(scenario, out, std::cerr, quiet).exit_code;
  } catch (const vl::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Paraxial electron vortex beams in axial magnetic fields"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario file or preset");
  std::string file, preset, out = ".";
  std::vector<std::string> sets;
  bool quiet = false;
  run->add_option("scenario", file, "Scenario JSON file");
  run->add_option("--preset", preset, "Preset name (see `vortexlens presets`)");
  run->add_option("--set", sets, "Override, dotted key path: --set field.B_f_T=0.3")->allow_extra_args(false);
  run->add_option("--out", out, "Output directory")->capture_default_str();
  run->add_flag("--quiet", quiet, "Only print warnings and errors");

  app.add_subcommand("presets", "List preset names");
  auto* show = app.add_subcommand("show-preset", "Print a preset as JSON");
  std::string show_name;
  show->add_option("name", show_name, "Preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*run) return do_run(file, preset, sets, out, quiet);
  if (app.got_subcommand("presets")) {
    for (const auto& n : vl::preset_names()) std::cout << n << "\n";
    return 0;
  }
  try {
    std::cout << vl::load_preset(show_name).first.dump(2) << "\n";
    return 0;
  } catch (const vl::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
