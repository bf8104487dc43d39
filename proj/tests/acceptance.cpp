// Runs the reference scenarios and prints one PASS/FAIL line per acceptance
// criterion. Exits non-zero only on an internal error or when a criterion
// outside `known_failures` fails. An optional argument names a directory
// that receives the outputs of the reference runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <blochcav/analysis.hpp>
#include <blochcav/errors.hpp>
#include <blochcav/scenario.hpp>

namespace {

using namespace blochcav;
constexpr double pi = std::numbers::pi;

// Criteria that cannot be met by a faithful implementation; each is
// explained in the README.
const std::set<int> known_failures = {4, 7, 9};

struct Outcome {
  int id;
  bool pass;
  std::string summary;
};

std::vector<Outcome> outcomes;
std::optional<std::filesystem::path> output_root;

void report(int id, bool pass, const std::string& summary) {
  outcomes.push_back({id, pass, summary});
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", summary.c_str());
  std::fflush(stdout);
}

void info(const std::string& text) {
  std::printf("    %s\n", text.c_str());
  std::fflush(stdout);
}

struct Timed {
  ScenarioResult result;
  double seconds = 0.0;
};

Timed run(RunConfig c) {
  c.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto start = std::chrono::steady_clock::now();
  Timed t{run_scenario(c, [](const std::string& m) { spdlog::info("{}", m); }), 0.0};
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (output_root) write_outputs(t.result, *output_root / c.scenario.label);
  return t;
}

double velocity(const std::optional<VelocityFit>& v) { return v ? v->sites_per_period : std::nan(""); }

// Samples up to transient + `periods` Bloch periods.
std::size_t window(double sample_dt, const OperatingPoint& op, double periods) {
  const double t = transient_time(op.scaled) + periods * op.scaled.bloch_period();
  return static_cast<std::size_t>(std::floor(t / sample_dt)) + 1;
}

std::vector<double> in_sites(std::span<const double> z) {
  std::vector<double> out(z.begin(), z.end());
  for (double& x : out) x /= pi;
  return out;
}

double max_norm_drift(const TraceRecord& tr) {
  double worst = 0.0;
  for (double n : tr.norm) worst = std::max(worst, std::abs(n - tr.norm.front()));
  return worst;
}

bool within(double numeric, double reference, double rel, double abs_floor) {
  return std::abs(numeric - reference) <= std::max(rel * std::abs(reference), abs_floor);
}

// Loop orientation, work sign and drift direction agree, and the work per
// period balances the tilt energy gained per period, omega_B v.
bool work_consistent(const PointResult& r, std::string& line) {
  const auto& a = *r.full_analysis;
  if (!a.loop || !a.velocity) {
    line = "no loop or velocity";
    return false;
  }
  const double v = a.velocity->sites_per_period;
  const double w = a.loop->per_period;
  const double tilt = r.point.scaled.omega_B * v;
  const bool signs = (a.loop->clockwise == (w > 0.0)) && ((w > 0.0) == (v > 0.0));
  const bool balance = std::abs(w - tilt) <= 0.1 * std::abs(tilt);
  line = fmt::format("delta0 {:+.3f} kappa: v {:+.4f}, work {:+.3e} vs tilt {:+.3e}, {}", r.point.delta0 / r.point.scaled.kappa,
                     v, w, tilt, a.loop->clockwise ? "clockwise" : "anticlockwise");
  return signs && balance;
}

int run_all() {
  const auto wall = std::chrono::steady_clock::now();

  // Reference runs.
  const auto up = run(preset("fig2a_uphill"));
  const auto down = run(preset("fig2a_downhill"));
  const auto breathing = run(preset("fig2b_breathing"));
  const auto frozen = run(preset("static_lattice"));
  auto sweep_config = preset("fig5_sweep");
  sweep_config.scenario.ladder = true;
  const auto sweep = run(sweep_config);
  const auto& U = up.result.points.front();
  const auto& D = down.result.points.front();
  const auto& B = breathing.result.points.front();

  // 1. transport direction
  {
    const auto& vu = U.full_analysis->velocity;
    const auto& vd = D.full_analysis->velocity;
    const bool ok = vu && vd && vu->sites_per_period > 0.1 && vd->sites_per_period < -0.1 && vu->periods >= 10 &&
                    vd->periods >= 10 && vu->steady && vd->steady;
    report(1, ok,
           fmt::format("uphill {:+.4f}, downhill {:+.4f} sites/period over {} periods", velocity(vu), velocity(vd),
                       vu ? vu->periods : 0));
    info(fmt::format("wall time per run: {:.0f} s, {:.0f} s", up.seconds, down.seconds));
  }

  // 2. breathing without transport
  {
    const double v = velocity(B.full_analysis->velocity);
    const double depth_b = B.full_analysis->depth_amplitude;
    const double depth_d = D.full_analysis->depth_amplitude;
    const bool ok = std::abs(v) < 0.01 && depth_b * 10.0 <= depth_d;
    report(2, ok,
           fmt::format("localized drift {:+.2e} sites/period, depth modulation {:.3e} vs delocalized {:.3e} E_r", v,
                       depth_b, depth_d));
  }

  const auto zero = std::ranges::find_if(sweep.result.points, [](const PointResult& r) { return r.point.delta0 == 0.0; });

  // 3. sideband asymmetry
  {
    const auto& su = *U.full_analysis->sidebands;
    const auto& sd = *D.full_analysis->sidebands;
    const auto& s0 = *zero->full_analysis->sidebands;
    const bool ok = sd.plus > sd.minus && su.minus > su.plus && std::abs(s0.asymmetry()) < 0.05 &&
                    U.full_analysis->spectrum_resolution <= U.point.scaled.omega_B / 100.0 * (1 + 1e-12);
    report(3, ok,
           fmt::format("downhill P+/P- {:.3f}, uphill P+/P- {:.3f}, delta0 = 0 asymmetry {:+.4f}", sd.plus / sd.minus,
                       su.plus / su.minus, s0.asymmetry()));
  }

  // 4. closed-form velocity against the full model
  {
    bool ok = sweep.result.points.size() >= 9;
    double scale = 0.0;
    for (const auto& r : sweep.result.points) scale = std::max(scale, std::abs(r.analytic.printed));
    int misses = 0;
    for (const auto& r : sweep.result.points) {
      const double vn = velocity(r.full_analysis->velocity);
      const double va = r.analytic.sites_per_period;
      const bool match = within(vn, va, 0.15, 0.02);
      const bool identity = std::abs(r.analytic.sideband_form - r.analytic.printed) <= 1e-12 * scale;
      if (!match) ++misses;
      ok = ok && match && identity;
      info(fmt::format("delta0 {:+.3f} kappa: numeric {:+.4f}, closed form {:+.4f}, nn ladder {:+.4f}{}{}",
                       r.point.delta0 / r.point.scaled.kappa, vn, va, velocity(r.ladder_analysis ? r.ladder_analysis->velocity : std::nullopt),
                       match ? "" : "  <- off", identity ? "" : "  (forms disagree)"));
    }
    report(4, ok, fmt::format("{} of {} detunings outside 15% / 0.02; sweep took {:.0f} s", misses,
                              sweep.result.points.size(), sweep.seconds));
  }

  // 5. no optical spring: modulation at omega_B for every detuning and depth
  {
    auto deep = preset("fig5_sweep");
    deep.sweep = {};
    deep.scenario.label = "deep";
    deep.scenario.delta0_kappa = 1.0;
    deep.scenario.initial_depth_er = -6.0;
    const auto d = run(deep);
    bool ok = true;
    double worst = 0.0;
    auto check = [&](const PointResult& r) {
      const auto& a = *r.full_analysis;
      const double w = r.point.scaled.omega_B;
      const double bin = w / 100.0;
      worst = std::max({worst, std::abs(a.overlap_frequency - w) / bin, std::abs(a.coherence_frequency - w) / bin});
      ok = ok && a.spectrum_resolution <= bin * (1 + 1e-12) && std::abs(a.overlap_frequency - w) <= bin &&
           std::abs(a.coherence_frequency - w) <= bin;
    };
    for (const auto& r : sweep.result.points) check(r);
    check(d.result.points.front());
    report(5, ok, fmt::format("largest offset from omega_B: {:.2f} bins (sweep plus depth -6 E_r)", worst));
  }

  // 6. WS ladder fidelity
  {
    const auto n = preset("fig2a_uphill").numerics;
    const double w = U.point.scaled.omega_B;
    const auto box = diagonalize_box(-3.0, w, SpatialGrid::lattice(n.ws_box_sites, n.points_per_period), n.ws_edge_margin);
    const auto coarse = compute_ws_basis(-3.0, w, SpatialGrid::lattice(64, n.points_per_period), 64);
    const auto fine = compute_ws_basis(-3.0, w, SpatialGrid::lattice(64, 2 * n.points_per_period), 64);
    const auto& a = coarse.elements;
    const auto& b = fine.elements;
    const double drift = std::max({std::abs(a.gamma0 - b.gamma0), std::abs(a.gamma1 - b.gamma1), std::abs(a.Z0 - b.Z0),
                                   std::abs(a.Z1 - b.Z1)});
    const bool ok = box.max_spacing_error() < 1e-6 && box.max_translation_error() < 1e-6 && drift < 1e-6;
    report(6, ok,
           fmt::format("spacing {:.1e}, translation {:.1e}, grid doubling {:.1e}", box.max_spacing_error(),
                       box.max_translation_error(), drift));
    info(fmt::format("gamma0 {:.6f}, gamma1 {:.6f}, Z0 {:.6f}, Z1 {:.6f}", a.gamma0, a.gamma1, a.Z0, a.Z1));
  }

  // 7. reduced model against the full model, first 10 periods
  {
    bool ok = true;
    auto compare = [&](const PointResult& r, const char* name) {
      const auto& f = *r.full;
      const auto& l = *r.ladder;
      const double discard = transient_time(r.point.scaled);
      const double w = r.point.scaled.omega_B;
      const std::size_t nf = std::min(f.size(), window(f.sample_dt, r.point, 10.0));
      const std::size_t nl = std::min(l.size(), window(l.sample_dt, r.point, 10.0));
      const auto zf = std::span(f.centroid).first(nf);
      const auto zl = std::span(l.centroid).first(nl);
      const double vf = numeric_transport_velocity(zf, f.sample_dt, w, discard).sites_per_period;
      const double vl = numeric_transport_velocity(zl, l.sample_dt, w, discard).sites_per_period;
      const double af = periodic_amplitude(in_sites(zf), f.sample_dt, w, discard);
      const double al = periodic_amplitude(in_sites(zl), l.sample_dt, w, discard);
      const bool pass = within(vl, vf, 0.10, 0.0) && within(al, af, 0.05, 0.0);
      ok = ok && pass;
      info(fmt::format("{}: drift full {:+.4f} ladder {:+.4f} ({:+.1f}%), amplitude full {:.4f} ladder {:.4f} ({:+.1f}%)",
                       name, vf, vl, 100.0 * (vl / vf - 1.0), af, al, 100.0 * (al / af - 1.0)));
      return std::pair{vf, af};
    };
    const auto [vu, au] = compare(U, "uphill");
    const auto [vd, ad] = compare(D, "downhill");
    report(7, ok, "nearest-neighbour ladder vs full model (drift 10%, amplitude 5%)");

    // Information only: three neighbours plus the depth dependence of gamma0.
    for (const char* name : {"fig2a_uphill", "fig2a_downhill"}) {
      auto c = preset(name);
      c.scenario.label = std::string("extended_") + name;
      c.scenario.full = false;
      c.numerics.periods = 11.0;
      c.numerics.ladder_range = 3;
      c.numerics.ladder_depth_response = true;
      const auto e = run(c).result.points.front();
      const auto& l = *e.ladder;
      const double discard = transient_time(e.point.scaled);
      const double w = e.point.scaled.omega_B;
      const std::size_t nl = std::min(l.size(), window(l.sample_dt, e.point, 10.0));
      const auto zl = std::span(l.centroid).first(nl);
      const double vl = numeric_transport_velocity(zl, l.sample_dt, w, discard).sites_per_period;
      const double al = periodic_amplitude(in_sites(zl), l.sample_dt, w, discard);
      const bool is_up = std::string(name) == "fig2a_uphill";
      const double vf = is_up ? vu : vd;
      const double af = is_up ? au : ad;
      info(fmt::format("extended ladder, {}: drift {:+.4f} ({:+.1f}%), amplitude {:.4f} ({:+.1f}%)", name, vl,
                       100.0 * (vl / vf - 1.0), al, 100.0 * (al / af - 1.0)));
    }
  }

  // 8. conservation
  {
    double norm = 0.0, atoms = 0.0;
    auto scan = [&](const ScenarioResult& s) {
      for (const auto& r : s.points) {
        if (r.full) norm = std::max(norm, max_norm_drift(*r.full));
        if (r.ladder_analysis) atoms = std::max(atoms, r.ladder_analysis->atom_number_drift);
      }
    };
    for (const auto* s : {&up, &down, &breathing, &frozen, &sweep}) scan(s->result);

    // Atoms frozen at overlap c: the field relaxes exponentially to its steady value.
    const auto& s = U.point.scaled;
    const double c = 0.63;
    const complex rate(s.kappa, -(s.delta_c - s.collective_shift() * c));
    const complex a_ss = s.eta / rate;
    const complex a0 = 0.3 * a_ss * complex(0.0, 1.0);
    const double dt = s.bloch_period() / 400.0;
    complex a = a0;
    double ode = 0.0;
    for (int i = 1; i <= 4000; ++i) {
      a = integrate_field(a, c, c, c, s, dt).end;
      ode = std::max(ode, std::abs(a - (a_ss + (a0 - a_ss) * std::exp(-rate * (i * dt)))) / std::abs(a_ss));
    }

    const auto& f = *frozen.result.points.front().full;
    const auto per = static_cast<std::size_t>(std::llround(s.bloch_period() / f.sample_dt));
    double periodic = 0.0;
    for (std::size_t i = 0; i + per < f.size(); ++i)
      periodic = std::max(periodic, std::abs(f.centroid[i + per] - f.centroid[i]));

    const bool ok = norm < 1e-8 && atoms < 1e-8 && ode < 1e-8 && periodic < 1e-3 * pi;
    report(8, ok,
           fmt::format("norm drift {:.1e}, atom number drift {:.1e}, frozen-atom field {:.1e}, static period {:.2e} pi",
                       norm, atoms, ode, periodic / pi));
  }

  // 9. metrology and the atom-detuning rescaling
  {
    constexpr double r = 20.0;
    const auto& a = *U.full_analysis;
    const auto& b = *D.full_analysis;
    const bool base = std::abs(a.metrology.coherence_time / 5e-3 - 1.0) <= 0.2 &&
                      std::abs(b.metrology.coherence_time / 5e-3 - 1.0) <= 0.2;
    const auto physical = preset("fig2a_uphill").physical.to_physical();
    const auto quoted = coherence_time(physical, a.mean_photons, a.mean_delta_f, 1.3);

    // Same run with Delta_a, N scaled by r and U0 by 1/r, for a few periods.
    auto c1 = preset("fig2a_uphill");
    c1.scenario.ladder = false;
    c1.numerics.periods = 6.0;
    c1.scenario.label = "rescale_r1";
    auto c20 = c1;
    c20.scenario.label = "rescale_r20";
    c20.physical.atom_detuning_hz *= r;
    c20.physical.atom_number *= r;
    c20.physical.u0_hz /= r;
    const auto t1 = run(c1).result.points.front();
    const auto t20 = run(c20).result.points.front();
    const auto& s1 = t1.point.scaled;
    const auto& s20 = t20.point.scaled;
    const double scaled_diff =
        std::max({std::abs(s20.omega_B / s1.omega_B - 1.0), std::abs(s20.kappa / s1.kappa - 1.0),
                  std::abs(s20.collective_shift() / s1.collective_shift() - 1.0),
                  std::abs(s20.u0 * s20.eta * s20.eta / (s1.u0 * s1.eta * s1.eta) - 1.0),
                  std::abs(s20.delta_c / s1.delta_c - 1.0)});
    double trace_diff = 0.0;
    for (std::size_t i = 0; i < t1.full->size(); ++i) {
      trace_diff = std::max({trace_diff, std::abs(t20.full->centroid[i] - t1.full->centroid[i]),
                             std::abs(t20.full->depth[i] - t1.full->depth[i]),
                             std::abs(t20.full->overlap[i] - t1.full->overlap[i])});
    }
    const auto rescaled = coherence_time(c20.physical.to_physical(), r * a.mean_photons, a.mean_delta_f);
    const bool invariant = scaled_diff < 1e-12 && trace_diff < 1e-9;
    const bool two_seconds = std::abs(rescaled.coherence_time / 2.0 - 1.0) <= 0.2;
    report(9, base && invariant && two_seconds,
           fmt::format("tau {:.2f} / {:.2f} ms (C = {:.3f}), r = 20: tau {:.3f} s, scaled params {:.1e}, traces {:.1e}",
                       1e3 * a.metrology.coherence_time, 1e3 * b.metrology.coherence_time, a.metrology.cooperativity,
                       rescaled.coherence_time, scaled_diff, trace_diff));
    info(fmt::format("with the quoted C = 1.3: tau {:.2f} ms; tau_sp {:.2f} ms; r = 20 tau_sp {:.3f} s",
                     1e3 * quoted.coherence_time, 1e3 * a.metrology.tau_sp, rescaled.tau_sp));
  }

  // 10. work and transport
  {
    bool ok = true;
    std::string line;
    for (const auto* s : {&up, &down, &sweep}) {
      for (const auto& r : s->result.points) {
        const bool pass = work_consistent(r, line);
        ok = ok && pass;
        info(line + (pass ? "" : "  <- inconsistent"));
      }
    }
    report(10, ok, "loop orientation, work sign and drift agree; work balances tilt energy within 10%");
  }

  info(fmt::format("total wall time {:.0f} s",
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - wall).count()));
  int unexpected = 0;
  for (const auto& o : outcomes) {
    if (!o.pass && !known_failures.contains(o.id)) ++unexpected;
    if (o.pass && known_failures.contains(o.id)) info(fmt::format("criterion {} now passes", o.id));
  }
  return unexpected == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_pattern("[%l] %v");
  if (argc > 1) output_root = argv[1];
  try {
    return run_all();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
