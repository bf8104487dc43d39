#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "blochcav/analysis.hpp"
#include "blochcav/config.hpp"
#include "blochcav/ladder.hpp"
#include "blochcav/meanfield.hpp"

namespace blochcav {

/// Pump and detuning of one run after resolving the config options against
/// the WS basis at the initial depth.
struct OperatingPoint {
  ScaledParams scaled;  // eta and delta_c filled in
  double s0 = 0.0;      // u0 |alpha0|^2 with alpha0 the static field
  double delta0 = 0.0;  // Delta_c - N u0 gamma0
  double sweep_value = 0.0;
  bool swept = false;
  long center_site = 0;

  /// (Delta_c - N u0) / kappa.
  [[nodiscard]] double cavity_detuning_kappa() const {
    return (scaled.delta_c - scaled.collective_shift()) / scaled.kappa;
  }
};

/// Everything derived from the full simulation of one point.
struct FullAnalysis {
  std::optional<VelocityFit> velocity;  // needs 5 whole periods after the transient
  double oscillation_amplitude = 0.0;   // sites
  double depth_amplitude = 0.0;         // E_r
  std::optional<Spectrum> spectrum;
  std::optional<SidebandPowers> sidebands;
  double spectrum_resolution = 0.0;
  double overlap_frequency = 0.0;    // dominant frequency of C(t)
  double coherence_frequency = 0.0;  // dominant frequency of 2 Re sum c_n^* c_{n+1}
  std::optional<LoopWork> loop;
  MetrologyEstimate metrology;
  double mean_photons = 0.0;
  double mean_delta_f = 0.0;  // rad/s
};

struct LadderAnalysis {
  std::optional<VelocityFit> velocity;
  double oscillation_amplitude = 0.0;
  double atom_number_drift = 0.0;  // max |N(t) - N(0)| / N(0)
};

struct PointResult {
  OperatingPoint point;
  MatrixElements elements;
  double sigma1 = 0.0;  // initial coherence
  double spacing_error = 0.0;
  double translation_error = 0.0;
  AnalyticVelocity analytic;
  std::optional<TraceRecord> full;
  std::optional<FullAnalysis> full_analysis;
  std::optional<LadderTrace> ladder;
  std::optional<LadderAnalysis> ladder_analysis;
  /// Basis states near the packet, for basis.csv.
  std::optional<WSBasis> basis;
};

struct ScenarioResult {
  RunConfig config;
  std::vector<PointResult> points;  // sorted by sweep value
};

/// Samples discarded as the cavity transient before any fit: 3 / kappa.
double transient_time(const ScaledParams& scaled);

/// Resolves pump and detuning. With a depth the static field is fixed
/// directly; with an explicit pump the depth is found self-consistently
/// (gamma0 depends on it), which costs one basis per iteration.
/// `sweep_value` replaces the scenario detuning when the config sweeps.
OperatingPoint resolve_operating_point(const RunConfig& config, std::optional<double> sweep_value = {});

using ProgressCallback = std::function<void(const std::string&)>;

/// Runs every point (sweep points in parallel on config.threads workers).
/// Errors are rethrown with the point label prepended, keeping their type.
ScenarioResult run_scenario(const RunConfig& config, const ProgressCallback& progress = {});

/// Writes CSV files and manifest.json under `dir`. A sweep gets one
/// summary row per point in velocity.csv and metrology.csv and a
/// subdirectory per point for traces.
void write_outputs(const ScenarioResult& result, const std::filesystem::path& dir);

/// manifest.json contents: the config in expanded form plus a "resolved"
/// block with the operating points. Loadable with parse_config.
std::string manifest_json(const ScenarioResult& result);

}  // namespace blochcav
