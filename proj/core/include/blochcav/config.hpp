#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blochcav/meanfield.hpp"
#include "blochcav/units.hpp"

namespace blochcav {

/// Laboratory inputs as written in a config file. Frequencies are plain Hz
/// (no 2 pi); they are converted to angular rates on use.
struct PhysicalInput {
  double atom_mass_u = constants::sr88_mass_u;
  double wavelength_nm = 689.0;
  std::optional<double> bloch_frequency_hz;  // exactly one of these two
  std::optional<double> bias_force_n;
  double kappa_hz = 1000.0;
  std::optional<double> pump_rate_hz;        // eta / 2 pi
  std::optional<double> cavity_detuning_hz;  // Delta_c / 2 pi
  double u0_hz = -1.0;
  double atom_number = 1000.0;
  double gamma_hz = 7600.0;
  double atom_detuning_hz = -10e6;

  /// SI parameters; pump rate and cavity detuning stay 0 when not given.
  [[nodiscard]] PhysicalParams to_physical() const;
  friend bool operator==(const PhysicalInput&, const PhysicalInput&) = default;
};

struct NumericsConfig {
  std::size_t n_sites = 128;
  std::size_t points_per_period = 16;
  std::size_t steps_per_period = 24000;
  std::size_t samples_per_period = 100;
  double periods = 10.0;
  std::size_t ws_box_sites = 48;
  std::size_t ws_edge_margin = 14;
  double edge_tolerance = 1e-3;
  std::size_t ladder_pad_sites = 30;
  std::size_t ladder_steps_per_period = 400;
  std::size_t ladder_range = 1;
  bool ladder_depth_response = false;
  /// Turns validity-regime warnings into errors (exit code 4).
  bool strict = false;
  friend bool operator==(const NumericsConfig&, const NumericsConfig&) = default;
};

struct ScenarioConfig {
  /// Preset the run was built from, or "custom".
  std::string preset = "custom";
  /// Name used in output paths and logs; defaults to the preset.
  std::string label;
  InitialState::Kind initial = InitialState::Kind::delocalized;
  double width_sites = 20.0;
  long center_site = 0;
  /// Shifts the initial centre by this many sites against the expected
  /// transport direction (-sign delta0), leaving room for long runs.
  long drift_margin_sites = 0;
  /// Detuning: exactly one of these or physical.cavity_detuning_hz.
  std::optional<double> cavity_detuning_kappa;  // (Delta_c - N U0) / kappa
  std::optional<double> delta0_kappa;           // (Delta_c - N U0 gamma0) / kappa
  /// Pump: exactly one of this or physical.pump_rate_hz.
  std::optional<double> initial_depth_er;  // U0 |alpha0|^2 / E_r, negative
  bool backaction = true;
  bool full = true;
  bool ladder = false;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct SweepConfig {
  /// "delta0_kappa" or "cavity_detuning_kappa"; the swept value replaces
  /// the scenario's detuning at each point.
  std::string parameter;
  std::vector<double> values;

  [[nodiscard]] bool active() const { return !values.empty(); }
  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct OutputConfig {
  std::string dir = "blochcav-out";
  bool basis = false;  // also write basis.csv
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
  PhysicalInput physical;
  NumericsConfig numerics;
  ScenarioConfig scenario;
  SweepConfig sweep;
  OutputConfig output;
  std::size_t threads = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses the JSON config schema (sections physical, numerics, scenario,
/// sweep, output, plus an optional informational "resolved" block as
/// written to manifests). Unknown keys are rejected. A named preset is
/// expanded first and the remaining sections override it; a preset may not
/// be combined with a physical section.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Config as JSON in the same schema, in expanded form: no preset key, the
/// preset name kept as the label. parse_config(dump_config(c)) equals c
/// apart from scenario.preset, which comes back as "custom".
std::string dump_config(const RunConfig& config);

std::vector<std::string> preset_names();
/// One-line description of each preset, same order as preset_names().
std::vector<std::string> preset_descriptions();
RunConfig preset(std::string_view name);

/// Applies BLOCHCAV_OUTPUT_DIR and BLOCHCAV_THREADS when set.
void apply_environment(RunConfig& config);

}  // namespace blochcav
