#include "blochcav/config.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/fmt/fmt.h>

#include "blochcav/errors.hpp"

namespace blochcav {
namespace {

using json = nlohmann::json;

// Reads one JSON object field by field and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& object, std::string name) : object_(object), name_(std::move(name)) {
    if (!object_.is_object()) throw ConfigError(name_ + ": expected an object");
  }

  [[nodiscard]] bool has(const char* key) const { return object_.contains(key); }

  void read(const char* key, double& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(key, "must be finite");
    }
  }
  void read(const char* key, std::optional<double>& out) {
    if (const auto* v = find(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      double x = 0.0;
      read(key, x);
      out = x;
    }
  }
  void read(const char* key, std::size_t& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) fail(key, "expected a non-negative integer");
      out = v->get<std::size_t>();
    }
  }
  void read(const char* key, long& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_integer()) fail(key, "expected an integer");
      out = v->get<long>();
    }
  }
  void read(const char* key, bool& out) {
    if (const auto* v = find(key)) {
      if (!v->is_boolean()) fail(key, "expected true or false");
      out = v->get<bool>();
    }
  }
  void read(const char* key, std::string& out) {
    if (const auto* v = find(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }
  void read(const char* key, std::vector<double>& out) {
    if (const auto* v = find(key)) {
      if (!v->is_array()) fail(key, "expected an array of numbers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) fail(key, "expected an array of numbers");
        out.push_back(x.get<double>());
      }
    }
  }
  void read(const char* key, InitialState::Kind& out) {
    std::string s;
    if (find(key) == nullptr) return;
    read(key, s);
    if (s == "delocalized")
      out = InitialState::Kind::delocalized;
    else if (s == "localized")
      out = InitialState::Kind::localized;
    else
      fail(key, "expected \"delocalized\" or \"localized\"");
  }

  /// Throws on any key that was not read.
  void finish() const {
    for (const auto& [key, value] : object_.items())
      if (!seen_.contains(key)) throw ConfigError(fmt::format("{}.{}: unknown key", name_, key));
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    const auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError(fmt::format("{}.{}: {}", name_, key, what));
  }

  const json& object_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_physical(Section s, PhysicalInput& p) {
  s.read("atom_mass_u", p.atom_mass_u);
  s.read("wavelength_nm", p.wavelength_nm);
  s.read("bloch_frequency_hz", p.bloch_frequency_hz);
  s.read("bias_force_n", p.bias_force_n);
  s.read("kappa_hz", p.kappa_hz);
  s.read("pump_rate_hz", p.pump_rate_hz);
  s.read("cavity_detuning_hz", p.cavity_detuning_hz);
  s.read("u0_hz", p.u0_hz);
  s.read("atom_number", p.atom_number);
  s.read("gamma_hz", p.gamma_hz);
  s.read("atom_detuning_hz", p.atom_detuning_hz);
  s.finish();
}

void read_numerics(Section s, NumericsConfig& n, std::size_t& threads) {
  s.read("n_sites", n.n_sites);
  s.read("points_per_period", n.points_per_period);
  s.read("steps_per_period", n.steps_per_period);
  s.read("samples_per_period", n.samples_per_period);
  s.read("periods", n.periods);
  s.read("ws_box_sites", n.ws_box_sites);
  s.read("ws_edge_margin", n.ws_edge_margin);
  s.read("edge_tolerance", n.edge_tolerance);
  s.read("ladder_pad_sites", n.ladder_pad_sites);
  s.read("ladder_steps_per_period", n.ladder_steps_per_period);
  s.read("ladder_range", n.ladder_range);
  s.read("ladder_depth_response", n.ladder_depth_response);
  s.read("strict", n.strict);
  s.read("threads", threads);
  s.finish();
}

void read_scenario(Section s, ScenarioConfig& c) {
  s.read("label", c.label);
  s.read("initial", c.initial);
  s.read("width_sites", c.width_sites);
  s.read("center_site", c.center_site);
  s.read("drift_margin_sites", c.drift_margin_sites);
  s.read("cavity_detuning_kappa", c.cavity_detuning_kappa);
  s.read("delta0_kappa", c.delta0_kappa);
  s.read("initial_depth_er", c.initial_depth_er);
  s.read("backaction", c.backaction);
  s.read("full", c.full);
  s.read("ladder", c.ladder);
  std::string preset;
  s.read("preset", preset);  // consumed by parse_config
  s.finish();
}

void read_sweep(Section s, SweepConfig& w) {
  s.read("parameter", w.parameter);
  s.read("values", w.values);
  s.finish();
}

void read_output(Section s, OutputConfig& o) {
  s.read("dir", o.dir);
  s.read("basis", o.basis);
  s.finish();
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

const char* kind_name(InitialState::Kind k) {
  return k == InitialState::Kind::localized ? "localized" : "delocalized";
}

RunConfig base_preset() {
  RunConfig c;
  c.physical.bloch_frequency_hz = 744.5;
  c.scenario.initial_depth_er = -3.0;
  return c;
}

struct PresetEntry {
  const char* name;
  const char* description;
  RunConfig (*make)();
};

const PresetEntry presets[] = {
    {"fig2a_uphill", "delocalized 20-site packet, Delta_c - N U0 = 1.3 kappa, depth -3 E_r: uphill transport",
     [] {
       auto c = base_preset();
       c.scenario.cavity_detuning_kappa = 1.3;
       c.scenario.drift_margin_sites = 12;
       c.scenario.ladder = true;
       c.numerics.periods = 101.0;
       return c;
     }},
    {"fig2a_downhill", "as fig2a_uphill with Delta_c - N U0 = -0.7 kappa: downhill transport",
     [] {
       auto c = base_preset();
       c.scenario.cavity_detuning_kappa = -0.7;
       c.scenario.drift_margin_sites = 12;
       c.scenario.ladder = true;
       c.numerics.periods = 101.0;
       return c;
     }},
    {"fig2b_breathing", "single-site initial state at Delta_c - N U0 = -0.7 kappa: breathing without transport",
     [] {
       auto c = base_preset();
       c.scenario.cavity_detuning_kappa = -0.7;
       c.scenario.initial = InitialState::Kind::localized;
       c.scenario.ladder = true;
       c.numerics.periods = 20.0;
       return c;
     }},
    {"fig4", "both fig2a detunings with spectra and force-displacement loops",
     [] {
       auto c = base_preset();
       c.scenario.drift_margin_sites = 12;
       c.sweep.parameter = "cavity_detuning_kappa";
       c.sweep.values = {-0.7, 1.3};
       c.numerics.periods = 101.0;
       return c;
     }},
    {"fig5_sweep", "transport velocity over delta0 in [-2.5, 2.5] kappa at fixed initial depth -3 E_r",
     [] {
       auto c = base_preset();
       c.scenario.drift_margin_sites = 12;
       c.sweep.parameter = "delta0_kappa";
       c.sweep.values = {-2.5, -1.875, -1.25, -0.625, 0.0, 0.625, 1.25, 1.875, 2.5};
       c.numerics.periods = 101.0;
       return c;
     }},
    {"static_lattice", "control run with the lattice frozen at its initial depth (no backaction)",
     [] {
       auto c = base_preset();
       c.scenario.cavity_detuning_kappa = -0.7;
       c.scenario.backaction = false;
       c.numerics.periods = 10.0;
       return c;
     }},
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

PhysicalParams PhysicalInput::to_physical() const {
  using constants::two_pi;
  PhysicalParams p;
  p.atom_mass = atom_mass_u * constants::atomic_mass_unit;
  p.lattice_wavelength = wavelength_nm * 1e-9;
  p.cavity_decay = two_pi * kappa_hz;
  p.pump_rate = two_pi * pump_rate_hz.value_or(0.0);
  p.cavity_detuning = two_pi * cavity_detuning_hz.value_or(0.0);
  p.atom_light_shift = two_pi * u0_hz;
  p.atom_number = atom_number;
  p.atomic_linewidth = two_pi * gamma_hz;
  p.atom_detuning = two_pi * atom_detuning_hz;
  if (bloch_frequency_hz)
    p.bias_force = bias_force_for_bloch_frequency(p, two_pi * *bloch_frequency_hz);
  else
    p.bias_force = bias_force_n.value_or(0.0);
  return p;
}

void RunConfig::validate() const {
  const auto& p = physical;
  require(p.atom_mass_u > 0.0, "physical.atom_mass_u: must be positive");
  require(p.wavelength_nm > 0.0, "physical.wavelength_nm: must be positive");
  require(p.bloch_frequency_hz.has_value() != p.bias_force_n.has_value(),
          "physical: give exactly one of bloch_frequency_hz and bias_force_n");
  if (p.bloch_frequency_hz) require(*p.bloch_frequency_hz > 0.0, "physical.bloch_frequency_hz: must be positive");
  if (p.bias_force_n) require(*p.bias_force_n < 0.0, "physical.bias_force_n: must be negative (towards -z)");
  require(p.kappa_hz > 0.0, "physical.kappa_hz: must be positive");
  require(p.u0_hz != 0.0,
          "physical.u0_hz: must be nonzero (the lattice is made by the cavity light); "
          "for a control run without backaction set scenario.backaction = false");
  require(p.atom_number >= 1.0, "physical.atom_number: must be at least 1");
  require(p.gamma_hz >= 0.0, "physical.gamma_hz: must be non-negative");
  require(p.atom_detuning_hz != 0.0 && (p.atom_detuning_hz > 0.0) == (p.u0_hz > 0.0),
          "physical.atom_detuning_hz: must be nonzero with the sign of u0_hz (U0 = Omega0^2 / Delta_a)");
  if (p.pump_rate_hz) require(*p.pump_rate_hz > 0.0, "physical.pump_rate_hz: must be positive");

  const auto& s = scenario;
  const int detunings = int(p.cavity_detuning_hz.has_value()) + int(s.cavity_detuning_kappa.has_value()) +
                        int(s.delta0_kappa.has_value());
  if (sweep.active())
    require(detunings == 0,
            "scenario: with a sweep the swept parameter sets the detuning; remove cavity_detuning_kappa, "
            "delta0_kappa and physical.cavity_detuning_hz");
  else
    require(detunings == 1,
            "scenario: give exactly one of cavity_detuning_kappa, delta0_kappa and physical.cavity_detuning_hz");
  require(p.pump_rate_hz.has_value() != s.initial_depth_er.has_value(),
          "scenario: give exactly one of initial_depth_er and physical.pump_rate_hz");
  if (s.initial_depth_er)
    require(*s.initial_depth_er != 0.0 && (*s.initial_depth_er > 0.0) == (p.u0_hz > 0.0),
            "scenario.initial_depth_er: must be nonzero with the sign of u0_hz");
  require(s.width_sites > 0.0, "scenario.width_sites: must be positive");
  require(s.full || s.ladder, "scenario: at least one of full and ladder must be true");
  require(s.label.find_first_of("/\\") == std::string::npos, "scenario.label: must not contain path separators");
  if (!s.backaction) require(!s.ladder, "scenario.ladder: the ladder model has no static-lattice mode");

  const auto& n = numerics;
  require(n.n_sites >= 16 && std::has_single_bit(n.n_sites), "numerics.n_sites: must be a power of two >= 16");
  require(n.points_per_period >= 8 && std::has_single_bit(n.points_per_period),
          "numerics.points_per_period: must be a power of two >= 8");
  require(n.samples_per_period >= 8, "numerics.samples_per_period: must be at least 8");
  require(n.steps_per_period > 0 && n.steps_per_period % n.samples_per_period == 0,
          "numerics.steps_per_period: must be a positive multiple of samples_per_period");
  require(n.periods > 0.0, "numerics.periods: must be positive");
  require(n.ws_edge_margin >= 1 && n.ws_box_sites >= 2 * n.ws_edge_margin + 4,
          "numerics.ws_box_sites: must be at least 2 ws_edge_margin + 4");
  require(n.edge_tolerance > 0.0, "numerics.edge_tolerance: must be positive");
  require(n.ladder_steps_per_period > 0 && n.ladder_steps_per_period % n.samples_per_period == 0,
          "numerics.ladder_steps_per_period: must be a positive multiple of samples_per_period");
  require(n.ladder_range >= 1 && n.ladder_range < n.ws_edge_margin,
          "numerics.ladder_range: must be between 1 and ws_edge_margin - 1");

  if (sweep.active()) {
    require(sweep.parameter == "delta0_kappa" || sweep.parameter == "cavity_detuning_kappa",
            "sweep.parameter: must be \"delta0_kappa\" or \"cavity_detuning_kappa\"");
    auto sorted = sweep.values;
    std::ranges::sort(sorted);
    require(std::ranges::adjacent_find(sorted) == sorted.end(), "sweep.values: must be distinct");
  } else {
    require(sweep.parameter.empty(), "sweep.values: missing or empty");
  }
  require(!output.dir.empty(), "output.dir: must not be empty");
  require(threads >= 1, "numerics.threads: must be at least 1");
}

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!root.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig c;

  std::string preset_name = "custom";
  if (root.contains("scenario") && root["scenario"].is_object() && root["scenario"].contains("preset")) {
    const auto& v = root["scenario"]["preset"];
    if (!v.is_string()) throw ConfigError("scenario.preset: expected a string");
    preset_name = v.get<std::string>();
  }
  if (preset_name != "custom") {
    if (root.contains("physical"))
      throw ConfigError("physical: not allowed together with scenario.preset (the preset fixes it)");
    c = preset(preset_name);
  }

  // Reading a section only assigns the keys that are present, so overrides
  // layer on top of the preset.
  static constexpr const char* sections[] = {"physical", "numerics", "scenario", "sweep", "output", "resolved"};
  for (const char* name : sections) {
    if (!root.contains(name)) continue;
    const json& v = root[name];
    const std::string sname = name;
    if (sname == "physical") read_physical(Section(v, sname), c.physical);
    else if (sname == "numerics") read_numerics(Section(v, sname), c.numerics, c.threads);
    else if (sname == "scenario") read_scenario(Section(v, sname), c.scenario);
    else if (sname == "sweep") read_sweep(Section(v, sname), c.sweep);
    else if (sname == "output") read_output(Section(v, sname), c.output);
    else if (!v.is_object()) throw ConfigError("resolved: expected an object");  // informational only
  }
  for (const auto& [key, value] : root.items()) {
    if (std::ranges::find_if(sections, [&](const char* s) { return key == s; }) == std::end(sections))
      throw ConfigError(fmt::format("{}: unknown section", key));
  }
  c.scenario.preset = preset_name;
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string dump_config(const RunConfig& c) {
  json root;
  const auto& p = c.physical;
  root["physical"] = {
      {"atom_mass_u", p.atom_mass_u},
      {"wavelength_nm", p.wavelength_nm},
      {"bloch_frequency_hz", optional_number(p.bloch_frequency_hz)},
      {"bias_force_n", optional_number(p.bias_force_n)},
      {"kappa_hz", p.kappa_hz},
      {"pump_rate_hz", optional_number(p.pump_rate_hz)},
      {"cavity_detuning_hz", optional_number(p.cavity_detuning_hz)},
      {"u0_hz", p.u0_hz},
      {"atom_number", p.atom_number},
      {"gamma_hz", p.gamma_hz},
      {"atom_detuning_hz", p.atom_detuning_hz},
  };
  const auto& n = c.numerics;
  root["numerics"] = {
      {"n_sites", n.n_sites},
      {"points_per_period", n.points_per_period},
      {"steps_per_period", n.steps_per_period},
      {"samples_per_period", n.samples_per_period},
      {"periods", n.periods},
      {"ws_box_sites", n.ws_box_sites},
      {"ws_edge_margin", n.ws_edge_margin},
      {"edge_tolerance", n.edge_tolerance},
      {"ladder_pad_sites", n.ladder_pad_sites},
      {"ladder_steps_per_period", n.ladder_steps_per_period},
      {"ladder_range", n.ladder_range},
      {"ladder_depth_response", n.ladder_depth_response},
      {"strict", n.strict},
      {"threads", c.threads},
  };
  const auto& s = c.scenario;
  // Written in expanded form: the physical section above already carries
  // everything the preset fixed, so the preset name survives only as label.
  root["scenario"] = {
      {"label", s.label.empty() && s.preset != "custom" ? s.preset : s.label},
      {"initial", kind_name(s.initial)},
      {"width_sites", s.width_sites},
      {"center_site", s.center_site},
      {"drift_margin_sites", s.drift_margin_sites},
      {"cavity_detuning_kappa", optional_number(s.cavity_detuning_kappa)},
      {"delta0_kappa", optional_number(s.delta0_kappa)},
      {"initial_depth_er", optional_number(s.initial_depth_er)},
      {"backaction", s.backaction},
      {"full", s.full},
      {"ladder", s.ladder},
  };
  root["sweep"] = {{"parameter", c.sweep.parameter}, {"values", c.sweep.values}};
  root["output"] = {{"dir", c.output.dir}, {"basis", c.output.basis}};
  return root.dump(2) + "\n";
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : presets) out.emplace_back(p.name);
  return out;
}

std::vector<std::string> preset_descriptions() {
  std::vector<std::string> out;
  for (const auto& p : presets) out.emplace_back(p.description);
  return out;
}

RunConfig preset(std::string_view name) {
  for (const auto& p : presets) {
    if (name == p.name) {
      auto c = p.make();
      c.scenario.preset = p.name;
      c.scenario.label = p.name;
      return c;
    }
  }
  throw ConfigError(fmt::format("scenario.preset: unknown preset \"{}\" (see list-presets)", name));
}

void apply_environment(RunConfig& config) {
  if (const char* dir = std::getenv("BLOCHCAV_OUTPUT_DIR"); dir != nullptr && *dir != '\0')
    config.output.dir = dir;
  if (const char* t = std::getenv("BLOCHCAV_THREADS"); t != nullptr && *t != '\0') {
    std::size_t value = 0;
    const std::string_view sv(t);
    const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), value);
    if (ec != std::errc{} || ptr != sv.data() + sv.size() || value == 0)
      throw ConfigError(fmt::format("BLOCHCAV_THREADS: expected a positive integer, got \"{}\"", sv));
    config.threads = value;
  }
}

}  // namespace blochcav
