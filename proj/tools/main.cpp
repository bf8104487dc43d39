// blochcav: run Bloch-oscillation scenarios in a cavity-generated lattice.
//
//   blochcav run --preset fig2a_uphill --out out/uphill
//   blochcav run --config my.json --threads 4
//   blochcav validate --config my.json
//   blochcav list-presets

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "blochcav/config.hpp"
#include "blochcav/errors.hpp"
#include "blochcav/scenario.hpp"

namespace {

constexpr int exit_other = 1;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;
constexpr int exit_regime = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw blochcav::ConfigError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Config from --config and/or --preset. With both, the preset is expanded
// and the file's sections override it.
blochcav::RunConfig build_config(const std::string& config_path, const std::string& preset_name) {
  if (config_path.empty()) {
    if (preset_name.empty()) throw blochcav::ConfigError("give --config, --preset or both");
    return blochcav::preset(preset_name);
  }
  const std::string text = read_file(config_path);
  try {
    if (preset_name.empty()) return blochcav::parse_config(text);
    nlohmann::json root;
    try {
      root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw blochcav::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw blochcav::ConfigError("config: expected a JSON object");
    root["scenario"]["preset"] = preset_name;
    return blochcav::parse_config(root.dump());
  } catch (const blochcav::ConfigError& e) {
    throw blochcav::ConfigError(config_path + ": " + e.what());
  }
}

int run(const std::string& config_path, const std::string& preset_name, const std::string& out,
        std::size_t threads) {
  auto config = build_config(config_path, preset_name);
  blochcav::apply_environment(config);
  if (!out.empty()) config.output.dir = out;
  if (threads > 0) config.threads = threads;
  config.validate();

  spdlog::info("running {} ({} point{}) into {}", config.scenario.label.empty() ? "custom" : config.scenario.label,
               config.sweep.active() ? config.sweep.values.size() : 1, config.sweep.active() ? "s" : "",
               config.output.dir);
  const auto result = blochcav::run_scenario(config, [](const std::string& msg) { spdlog::info("{}", msg); });
  blochcav::write_outputs(result, config.output.dir);

  for (const auto& p : result.points) {
    const double d0 = p.point.delta0 / p.point.scaled.kappa;
    std::string line = fmt::format("delta0 = {:+.4f} kappa  v_analytic = {:+.5f}", d0, p.analytic.sites_per_period);
    if (p.full_analysis && p.full_analysis->velocity)
      line += fmt::format("  v_full = {:+.5f}", p.full_analysis->velocity->sites_per_period);
    if (p.ladder_analysis && p.ladder_analysis->velocity)
      line += fmt::format("  v_ladder = {:+.5f}", p.ladder_analysis->velocity->sites_per_period);
    std::cout << line << " sites/period\n";
  }
  return 0;
}

int validate(const std::string& config_path) {
  auto config = blochcav::load_config(config_path);
  blochcav::apply_environment(config);
  config.validate();
  std::cout << config_path << ": ok\n";
  return 0;
}

int list_presets() {
  const auto names = blochcav::preset_names();
  const auto descriptions = blochcav::preset_descriptions();
  for (std::size_t i = 0; i < names.size(); ++i) std::cout << fmt::format("{:<16} {}\n", names[i], descriptions[i]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("blochcav"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Bloch oscillations of atoms in a cavity-generated optical lattice"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::string config_path, preset_name, out;
  std::size_t threads = 0;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write CSV output");
  run_cmd->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  run_cmd->add_option("--preset", preset_name, "Named preset (see list-presets)");
  run_cmd->add_option("--out", out, "Output directory (overrides config and BLOCHCAV_OUTPUT_DIR)");
  run_cmd->add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a configuration file without running it");
  validate_cmd->add_option("--config", validate_path, "JSON run configuration")->required();

  auto* list_cmd = app.add_subcommand("list-presets", "List the built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);

  try {
    if (*run_cmd) return run(config_path, preset_name, out, threads);
    if (*validate_cmd) return validate(validate_path);
    if (*list_cmd) return list_presets();
  } catch (const blochcav::ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return exit_config;
  } catch (const blochcav::NumericalError& e) {
    spdlog::error("numerical failure: {}", e.what());
    return exit_numerical;
  } catch (const blochcav::RegimeError& e) {
    spdlog::error("outside validity regime: {}", e.what());
    return exit_regime;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return exit_other;
  }
  return exit_other;
}
