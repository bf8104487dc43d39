#include "blochcav/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "blochcav/errors.hpp"

namespace blochcav {
namespace {

using json = nlohmann::json;

WSOptions ws_options(const NumericsConfig& n) { return {n.ws_box_sites, n.ws_edge_margin}; }

SpatialGrid simulation_grid(const NumericsConfig& n) { return SpatialGrid::lattice(n.n_sites, n.points_per_period); }

// gamma0 at a given depth, on a small grid: only the on-site overlap is needed.
double gamma0_at(double s0, double omega_B, const NumericsConfig& n) {
  const std::size_t sites = std::min(n.n_sites, 2 * n.ws_edge_margin + 4);
  const auto grid = SpatialGrid::lattice(std::bit_ceil(sites), n.points_per_period);
  return compute_ws_basis(s0, omega_B, grid, grid.n_sites(), ws_options(n)).elements.gamma0;
}

std::string point_label(const RunConfig& config, const OperatingPoint& p) {
  const std::string base = config.scenario.label.empty() ? config.scenario.preset : config.scenario.label;
  if (!p.swept) return base;
  return fmt::format("{}[{}={}]", base, config.sweep.parameter, p.sweep_value);
}

std::string point_dir(const RunConfig& config, const OperatingPoint& p) {
  return fmt::format("{}_{}", config.sweep.parameter, p.sweep_value);
}

// Rethrows the active exception with `context` prepended, keeping its type.
[[noreturn]] void rethrow_with(const std::string& context) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(context + ": " + e.what());
  } catch (const RegimeError& e) {
    throw RegimeError(context + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(context + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(context + ": " + e.what());
  }
}

FullAnalysis analyse_full(const TraceRecord& tr, const OperatingPoint& op, const RunConfig& config) {
  const auto& s = op.scaled;
  const double wB = s.omega_B;
  const double discard = transient_time(s);
  const double duration = tr.t.back() - tr.t.front();
  const double after = duration - discard;

  FullAnalysis a;
  if (after >= 5.0 * s.bloch_period()) {
    a.velocity = numeric_transport_velocity(tr.centroid, tr.sample_dt, wB, discard);
    a.loop = loop_work(tr.centroid, tr.force, tr.sample_dt, wB, discard);
  } else {
    spdlog::warn("{}: fewer than 5 Bloch periods after the cavity transient, no velocity fit", config.scenario.label);
  }
  std::vector<double> sites(tr.centroid.size());
  std::ranges::transform(tr.centroid, sites.begin(), [](double z) { return z / std::numbers::pi; });
  a.oscillation_amplitude = periodic_amplitude(sites, tr.sample_dt, wB, discard);
  a.depth_amplitude = periodic_amplitude(tr.depth, tr.sample_dt, wB, discard);

  // Spectrum and dominant frequencies over whole periods, up to 100 of them
  // (resolution omega_B / 100).
  const std::size_t per = config.numerics.samples_per_period;
  const auto whole = static_cast<std::size_t>(std::floor(after / s.bloch_period() + 1e-9));
  const std::size_t periods = std::min<std::size_t>(whole, 100);
  if (periods >= 1) {
    a.spectrum_resolution = wB / static_cast<double>(periods);
    a.spectrum = psd(tr.alpha, tr.sample_dt, a.spectrum_resolution);
    // the +-2 bin windows around +-omega_B need at least 3 periods
    if (periods >= 3)
      a.sidebands = sideband_powers(*a.spectrum, wB);
    else
      spdlog::warn("{}: fewer than 3 Bloch periods after the transient, no sideband powers", config.scenario.label);
    const std::size_t m = periods * per;
    const std::span<const double> c(tr.overlap.end() - static_cast<std::ptrdiff_t>(m), tr.overlap.end());
    a.overlap_frequency = dominant_frequency(c, tr.sample_dt);
    if (!tr.coherence.empty()) {
      std::vector<double> b(m);
      const auto first = tr.coherence.end() - static_cast<std::ptrdiff_t>(m);
      std::transform(first, tr.coherence.end(), b.begin(), [](complex x) { return 2.0 * x.real(); });
      a.coherence_frequency = dominant_frequency(b, tr.sample_dt);
    }
  }

  // Time averages for the metrology estimate.
  const std::size_t start = std::min(tr.size() - 1, static_cast<std::size_t>(std::ceil(discard / tr.sample_dt)));
  const auto count = static_cast<double>(tr.size() - start);
  double photons = 0.0, delta_f = 0.0;
  for (std::size_t i = start; i < tr.size(); ++i) {
    photons += tr.n_photons[i];
    delta_f += s.delta_c - s.collective_shift() * tr.overlap[i];
  }
  a.mean_photons = photons / count;
  a.mean_delta_f = delta_f / count * s.recoil_freq;
  const PhysicalParams physical = unscale(s, config.physical.to_physical());
  a.metrology = coherence_time(physical, a.mean_photons, a.mean_delta_f);
  return a;
}

LadderAnalysis analyse_ladder(const LadderTrace& tr, const OperatingPoint& op) {
  const auto& s = op.scaled;
  const double discard = transient_time(s);
  LadderAnalysis a;
  if (tr.t.back() - tr.t.front() - discard >= 5.0 * s.bloch_period())
    a.velocity = numeric_transport_velocity(tr.centroid, tr.sample_dt, s.omega_B, discard);
  std::vector<double> sites(tr.centroid.size());
  std::ranges::transform(tr.centroid, sites.begin(), [](double z) { return z / std::numbers::pi; });
  a.oscillation_amplitude = periodic_amplitude(sites, tr.sample_dt, s.omega_B, discard);
  for (double n : tr.atoms) a.atom_number_drift = std::max(a.atom_number_drift, std::abs(n / tr.atoms.front() - 1.0));
  return a;
}

PointResult run_point(const RunConfig& config, const OperatingPoint& op) {
  const auto& n = config.numerics;
  const auto& s = op.scaled;
  PointResult r;
  r.point = op;

  const auto grid = simulation_grid(n);
  WSBasis basis = compute_ws_basis(op.s0, s.omega_B, grid, n.n_sites, ws_options(n));
  r.elements = basis.elements;
  r.spacing_error = basis.spacing_error;
  r.translation_error = basis.translation_error;

  InitialState initial;
  initial.kind = config.scenario.initial;
  initial.center_site = op.center_site;
  initial.width_sites = config.scenario.width_sites;
  const Projection projection = project_onto_ws(init_wavepacket(initial, basis), basis);
  r.sigma1 = projection.sigma1();
  r.analytic = analytic_transport_velocity(s, basis.elements, r.sigma1, op.s0, op.delta0, n.strict);

  const double T = s.bloch_period();
  if (config.scenario.full) {
    SimConfig sim;
    sim.scaled = s;
    sim.grid = grid;
    sim.dt = T / static_cast<double>(n.steps_per_period);
    sim.sample_stride = n.steps_per_period / n.samples_per_period;
    sim.t_final = n.periods * T;
    sim.initial_state = initial;
    sim.backaction = config.scenario.backaction;
    sim.edge_tolerance = n.edge_tolerance;
    sim.record_coherence = true;
    sim.reference_overlap = basis.elements.gamma0;
    r.full = run(sim, basis);
    r.full_analysis = analyse_full(*r.full, op, config);
  }
  if (config.scenario.ladder) {
    const LadderCouplings couplings = n.ladder_range == 1 && !n.ladder_depth_response
                                          ? nearest_neighbour(basis.elements)
                                          : extended_couplings(basis, n.ladder_range, n.ladder_depth_response,
                                                               ws_options(n));
    LadderState state =
        make_ladder_state(projection.coefficients, projection.first_site, n.ladder_pad_sites, couplings, s);
    LadderConfig lc;
    lc.dt = T / static_cast<double>(n.ladder_steps_per_period);
    lc.t_final = n.periods * T;
    lc.sample_stride = n.ladder_steps_per_period / n.samples_per_period;
    r.ladder = run_ladder(std::move(state), lc);
    r.ladder_analysis = analyse_ladder(*r.ladder, op);
  }
  if (config.output.basis) r.basis = std::move(basis);
  return r;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, std::string_view header) : path_(path), out_(path) {
    if (!out_) throw ConfigError(fmt::format("cannot write {}", path.string()));
    out_ << header << '\n';
  }
  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((out_ << (first ? "" : ",") << format(values), first = false), ...);
    out_ << '\n';
  }
  ~Csv() noexcept(false) {
    out_.close();
    if (!out_ && std::uncaught_exceptions() == 0) throw ConfigError(fmt::format("cannot write {}", path_.string()));
  }

 private:
  static std::string format(double v) { return fmt::format("{:.17g}", v); }
  static std::string format(int v) { return std::to_string(v); }
  static std::string format(long v) { return std::to_string(v); }
  static std::string format(std::size_t v) { return std::to_string(v); }
  static std::string format(bool v) { return v ? "1" : "0"; }
  static std::string format(const std::string& v) { return v; }

  std::filesystem::path path_;
  std::ofstream out_;
};

double or_nan(const std::optional<VelocityFit>& v) {
  return v ? v->sites_per_period : std::numeric_limits<double>::quiet_NaN();
}

void write_point(const PointResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (r.full) {
    const auto& tr = *r.full;
    Csv csv(dir / "trace.csv", "t,re_alpha,im_alpha,n_photons,C,centroid,force,depth,norm");
    for (std::size_t i = 0; i < tr.size(); ++i)
      csv.row(tr.t[i], tr.alpha[i].real(), tr.alpha[i].imag(), tr.n_photons[i], tr.overlap[i], tr.centroid[i],
              tr.force[i], tr.depth[i], tr.norm[i]);
    const auto& a = *r.full_analysis;
    if (a.spectrum) {
      Csv sp(dir / "spectrum.csv", "freq,psd");
      for (std::size_t i = 0; i < a.spectrum->psd.size(); ++i) sp.row(a.spectrum->frequencies[i], a.spectrum->psd[i]);
    }
    if (a.loop) {
      Csv loop(dir / "loop.csv", "t,centroid,force");
      const auto start = static_cast<std::size_t>(std::ceil(transient_time(r.point.scaled) / tr.sample_dt));
      for (std::size_t i = start; i < tr.size(); ++i) loop.row(tr.t[i], tr.centroid[i], tr.force[i]);
    }
  }
  if (r.ladder) {
    const auto& tr = *r.ladder;
    Csv csv(dir / "ladder_trace.csv", "t,n_M,re_bM,im_bM,re_delta_alpha,im_delta_alpha,delta_n,centroid");
    for (std::size_t i = 0; i < tr.size(); ++i)
      csv.row(tr.t[i], tr.n_M[i], tr.b_M[i].real(), tr.b_M[i].imag(), tr.delta_alpha[i].real(),
              tr.delta_alpha[i].imag(), tr.delta_n[i], tr.centroid[i]);
  }
  if (r.basis) {
    const auto& b = *r.basis;
    const long c = r.point.center_site;
    std::vector<long> sites;
    for (long k = c - 2; k <= c + 2; ++k)
      if (b.slot_of(k) >= 0) sites.push_back(k);
    std::string header = "z";
    for (long k : sites) header += fmt::format(",phi_{}", k);
    std::ofstream out(dir / "basis.csv");
    out << header << '\n';
    for (std::size_t j = 0; j < b.grid.n_points; ++j) {
      out << fmt::format("{:.17g}", b.grid.z(j));
      for (long k : sites) out << fmt::format(",{:.17g}", b.state(k)[j]);
      out << '\n';
    }
    if (!out) throw ConfigError(fmt::format("cannot write {}", (dir / "basis.csv").string()));
  }
}

json point_json(const PointResult& r) {
  const auto& p = r.point;
  json j = {
      {"s0_er", p.s0},
      {"delta0_kappa", p.delta0 / p.scaled.kappa},
      {"cavity_detuning_kappa", p.cavity_detuning_kappa()},
      {"eta", p.scaled.eta},
      {"delta_c", p.scaled.delta_c},
      {"omega_B", p.scaled.omega_B},
      {"kappa", p.scaled.kappa},
      {"u0", p.scaled.u0},
      {"n_atoms", p.scaled.n_atoms},
      {"recoil_frequency_rad_s", p.scaled.recoil_freq},
      {"center_site", p.center_site},
      {"gamma0", r.elements.gamma0},
      {"gamma1", r.elements.gamma1},
      {"Z0", r.elements.Z0},
      {"Z1", r.elements.Z1},
      {"sigma1", r.sigma1},
      {"ws_spacing_error", r.spacing_error},
      {"ws_translation_error", r.translation_error},
      {"v_analytic_sites_per_period", r.analytic.sites_per_period},
      {"analytic_in_regime", r.analytic.in_regime},
  };
  if (p.swept) j["sweep_value"] = p.sweep_value;
  if (r.full_analysis && r.full_analysis->velocity)
    j["v_numeric_sites_per_period"] = r.full_analysis->velocity->sites_per_period;
  if (r.full) {
    j["norm_drift"] = r.full->norm.back() - r.full->norm.front();
    j["max_edge_ratio"] = r.full->max_edge_ratio;
  }
  if (r.ladder_analysis && r.ladder_analysis->velocity)
    j["v_ladder_sites_per_period"] = r.ladder_analysis->velocity->sites_per_period;
  return j;
}

}  // namespace

double transient_time(const ScaledParams& scaled) { return 3.0 / scaled.kappa; }

OperatingPoint resolve_operating_point(const RunConfig& config, std::optional<double> sweep_value) {
  const auto& sc = config.scenario;
  const auto& n = config.numerics;
  OperatingPoint op;
  op.scaled = scale(config.physical.to_physical());
  auto& s = op.scaled;
  const double Nu0 = s.collective_shift();

  std::optional<double> cavity_kappa = sc.cavity_detuning_kappa;
  std::optional<double> delta0_kappa = sc.delta0_kappa;
  if (sweep_value) {
    op.swept = true;
    op.sweep_value = *sweep_value;
    (config.sweep.parameter == "delta0_kappa" ? delta0_kappa : cavity_kappa) = *sweep_value;
  }
  // Delta_c for a given gamma0, from whichever detuning option is set.
  auto delta_c = [&](double gamma0) {
    if (delta0_kappa) return *delta0_kappa * s.kappa + Nu0 * gamma0;
    if (cavity_kappa) return Nu0 + *cavity_kappa * s.kappa;
    return config.physical.cavity_detuning_hz.value() * constants::two_pi / s.recoil_freq;
  };

  if (sc.initial_depth_er) {
    op.s0 = *sc.initial_depth_er;
    const double g0 = gamma0_at(op.s0, s.omega_B, n);
    s.delta_c = delta_c(g0);
    op.delta0 = s.delta_c - Nu0 * g0;
    s.eta = std::sqrt(op.s0 / s.u0 * (s.kappa * s.kappa + op.delta0 * op.delta0));
  } else {
    s.eta = config.physical.pump_rate_hz.value() * constants::two_pi / s.recoil_freq;
    auto depth_for = [&](double d0) { return s.u0 * s.eta * s.eta / (s.kappa * s.kappa + d0 * d0); };
    auto check_depth = [](double s0) {
      if (std::abs(s0) < 1.0)
        throw ConfigError(fmt::format("physical.pump_rate_hz: lattice depth {:.3g} E_r is below 1 E_r", s0));
    };
    double g0 = 0.0;
    if (delta0_kappa) {
      op.delta0 = *delta0_kappa * s.kappa;
      op.s0 = depth_for(op.delta0);
      check_depth(op.s0);
      g0 = gamma0_at(op.s0, s.omega_B, n);
    } else {
      // Fixed point in s0: gamma0 depends on the depth, which sets delta0.
      // Starts from the shallow-lattice value gamma0 = 1/2.
      g0 = 0.5;
      double s0 = depth_for(delta_c(g0) - Nu0 * g0);
      bool converged = false;
      for (int it = 0; it < 50 && !converged; ++it) {
        check_depth(s0);
        g0 = gamma0_at(s0, s.omega_B, n);
        const double next = depth_for(delta_c(g0) - Nu0 * g0);
        converged = std::abs(next - s0) <= 1e-10 * std::abs(s0);
        s0 = next;
      }
      if (!converged) throw NumericalError("operating point: self-consistent lattice depth did not converge");
      op.s0 = s0;
    }
    s.delta_c = delta_c(g0);
    op.delta0 = s.delta_c - Nu0 * g0;
  }

  op.center_site = sc.center_site;
  if (sc.drift_margin_sites != 0 && op.delta0 != 0.0)
    op.center_site -= (op.delta0 > 0.0 ? 1 : -1) * sc.drift_margin_sites;
  return op;
}

ScenarioResult run_scenario(const RunConfig& config, const ProgressCallback& progress) {
  config.validate();
  ScenarioResult result;
  result.config = config;

  std::vector<std::optional<double>> values;
  if (config.sweep.active()) {
    auto sorted = config.sweep.values;
    std::ranges::sort(sorted);
    values.assign(sorted.begin(), sorted.end());
  } else {
    values.emplace_back();
  }

  std::vector<std::optional<PointResult>> slots(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      std::string label = config.scenario.label;
      try {
        const OperatingPoint op = resolve_operating_point(config, values[i]);
        label = point_label(config, op);
        if (progress) progress(fmt::format("{}: delta0 = {:.4g} kappa, depth {:.4g} E_r", label,
                                           op.delta0 / op.scaled.kappa, op.s0));
        try {
          slots[i] = run_point(config, op);
        } catch (...) {
          rethrow_with(label);
        }
        if (progress) progress(fmt::format("{}: done", label));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(config.threads, values.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (auto& s : slots) result.points.push_back(std::move(*s));
  return result;
}

std::string manifest_json(const ScenarioResult& result) {
  json root = json::parse(dump_config(result.config));
  json points = json::array();
  for (const auto& p : result.points) points.push_back(point_json(p));
  root["resolved"] = {{"points", points}};
  return root.dump(2) + "\n";
}

void write_outputs(const ScenarioResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const bool sweep = result.config.sweep.active();
  {
    Csv v(dir / "velocity.csv",
          "delta0,cavity_detuning,v_numeric,v_analytic,v_ladder,P_plus,P_minus,loop_work,clockwise,"
          "oscillation_amplitude,ladder_amplitude,depth_amplitude,overlap_frequency,coherence_frequency");
    Csv m(dir / "metrology.csv", "delta0,tau,tau_sp,cooperativity,chi_prime,mean_photons,mean_delta_f");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : result.points) {
      const double d0 = r.point.delta0 / r.point.scaled.kappa;
      const FullAnalysis* a = r.full_analysis ? &*r.full_analysis : nullptr;
      const LadderAnalysis* l = r.ladder_analysis ? &*r.ladder_analysis : nullptr;
      v.row(d0, r.point.cavity_detuning_kappa(), a ? or_nan(a->velocity) : nan, r.analytic.sites_per_period,
            l ? or_nan(l->velocity) : nan, a && a->sidebands ? a->sidebands->plus : nan,
            a && a->sidebands ? a->sidebands->minus : nan, a && a->loop ? a->loop->per_period : nan,
            a && a->loop && a->loop->clockwise, a ? a->oscillation_amplitude : nan,
            l ? l->oscillation_amplitude : nan, a ? a->depth_amplitude : nan, a ? a->overlap_frequency : nan,
            a ? a->coherence_frequency : nan);
      if (a)
        m.row(d0, a->metrology.coherence_time, a->metrology.tau_sp, a->metrology.cooperativity,
              a->metrology.chi_prime, a->mean_photons, a->mean_delta_f);
    }
  }
  for (const auto& r : result.points)
    write_point(r, sweep ? dir / point_dir(result.config, r.point) : dir);
  write_text(dir / "manifest.json", manifest_json(result));
}

}  // namespace blochcav
