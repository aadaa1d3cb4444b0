#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpsim/config.hpp"
#include "qpsim/experiments.hpp"

namespace {

using namespace qpsim::cli;

constexpr int kValidationFailure = 2;
constexpr int kRuntimeFailure = 1;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_config = true) {
  if (with_config) cmd->add_option("config", c.config_path, "Experiment config (JSON)")->required();
  cmd->add_option("--seed", c.seed, "Override the config seed");
  cmd->add_option("--output-dir", c.output_dir, "Override the config output directory");
  cmd->add_flag("--quiet", c.quiet, "Suppress progress messages");
}

Overrides overrides_of(const Common& c) {
  Overrides o;
  o.seed = c.seed;
  if (c.output_dir) o.output_dir = *c.output_dir;
  return o;
}

void print_diagnostics(const std::string& path, const std::vector<Diagnostic>& diagnostics) {
  for (const Diagnostic& d : diagnostics) std::cerr << path << ": " << to_string(d) << "\n";
}

int run_experiment(ExperimentKind kind, const Common& c) {
  ParsedConfig parsed = load_config(c.config_path, overrides_of(c));
  if (parsed.ok() && parsed.config.kind != kind)
    parsed.diagnostics.push_back({"experiment",
                                  std::string("config is for '") + experiment_name(parsed.config.kind) +
                                      "', not '" + experiment_name(kind) + "'",
                                  0});
  if (!parsed.ok()) {
    print_diagnostics(c.config_path, parsed.diagnostics);
    return kValidationFailure;
  }
  std::ostringstream sink;
  std::ostream& log = c.quiet ? static_cast<std::ostream&>(sink) : std::cout;
  for (const auto& p : run(parsed.config, log))
    if (!c.quiet) std::cout << "wrote " << p.string() << "\n";
  return 0;
}

int report_error(const std::exception& e) {
  nlohmann::json j = {{"error", error_kind(e)}, {"message", e.what()}};
  std::cerr << j.dump() << "\n";
  return kRuntimeFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for electro-optic photonic processors fed by a single-photon source"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common common;
  std::function<int()> action;

  auto* validate_cmd = app.add_subcommand("validate", "Check a config and list every problem");
  add_common(validate_cmd, common);
  validate_cmd->callback([&] {
    action = [&] {
      const auto diagnostics = validate(common.config_path, overrides_of(common));
      if (diagnostics.empty()) {
        if (!common.quiet) std::cout << common.config_path << ": ok\n";
        return 0;
      }
      print_diagnostics(common.config_path, diagnostics);
      return kValidationFailure;
    };
  });

  const std::pair<const char*, const char*> experiments[] = {
      {"hom-fringe", "Two-photon interference fringe of one MZI"},
      {"demux", "Time-domain simulation of the 1x4 demultiplexer"},
      {"distribution", "Two-photon output distributions of a programmed mesh"},
      {"reconstruct", "Reconstruct a mesh unitary from photon statistics"},
      {"loss-budget", "End-to-end loss accounting and wavelength sweep"}};
  for (const auto& [name, help] : experiments) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, common);
    const ExperimentKind kind = *parse_experiment_name(name);
    cmd->callback([&, kind] { action = [&, kind] { return run_experiment(kind, common); }; });
  }

  auto* mesh_cmd = app.add_subcommand("mesh", "Convert between matrices and mesh settings");
  mesh_cmd->require_subcommand(1);
  std::string mesh_input;
  auto* decompose_cmd = mesh_cmd->add_subcommand("decompose", "Matrix JSON to rectangular mesh JSON");
  auto* compose_cmd = mesh_cmd->add_subcommand("compose", "Mesh JSON to matrix JSON");
  for (auto* cmd : {decompose_cmd, compose_cmd}) {
    cmd->add_option("input", mesh_input, "Input file")->required();
    add_common(cmd, common, false);
  }
  auto mesh_action = [&](bool decompose) {
    action = [&, decompose] {
      std::ostringstream sink;
      std::ostream& log = common.quiet ? static_cast<std::ostream&>(sink) : std::cout;
      const std::filesystem::path dir = common.output_dir ? *common.output_dir : ".";
      const auto written = decompose ? run_mesh_decompose(mesh_input, dir, log) : run_mesh_compose(mesh_input, dir, log);
      if (!common.quiet)
        for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
      return 0;
    };
  };
  decompose_cmd->callback([&] { mesh_action(true); });
  compose_cmd->callback([&] { mesh_action(false); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationFailure;
  }

  try {
    return action();
  } catch (const std::exception& e) {
    return report_error(e);
  }
}
