#include "blochcav/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <spdlog/fmt/fmt.h>

#include "blochcav/errors.hpp"
#include "blochcav/fft.hpp"

namespace blochcav {
namespace {

constexpr double pi = std::numbers::pi;
constexpr complex I{0.0, 1.0};

double cos2(double z) {
  const double c = std::cos(z);
  return c * c;
}

double wavenumber(std::size_t m, const SpatialGrid& grid) {
  const long n = static_cast<long>(grid.n_points);
  const long mm = static_cast<long>(m) < n / 2 ? static_cast<long>(m) : static_cast<long>(m) - n;
  return 2.0 * pi * static_cast<double>(mm) / grid.length();
}

complex field_rhs(complex alpha, double c, const ScaledParams& s) {
  const double delta_f = s.delta_c - s.n_atoms * s.u0 * c;
  return -(s.kappa - I * delta_f) * alpha + s.eta;
}

complex rk4(complex alpha, double c0, double c_half, double c1, const ScaledParams& s, double h) {
  const complex k1 = field_rhs(alpha, c0, s);
  const complex k2 = field_rhs(alpha + 0.5 * h * k1, c_half, s);
  const complex k3 = field_rhs(alpha + 0.5 * h * k2, c_half, s);
  const complex k4 = field_rhs(alpha + h * k3, c1, s);
  return alpha + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_finite(const WaveFunction& psi, const CavityField& field) {
  if (!std::isfinite(field.alpha.real()) || !std::isfinite(field.alpha.imag()))
    throw NumericalError(fmt::format("meanfield: cavity field is not finite at t = {}", psi.time));
  const double n = psi.norm();
  if (!std::isfinite(n))
    throw NumericalError(fmt::format("meanfield: wave function is not finite at t = {}", psi.time));
}

// Largest density in the outer `fraction` of the box relative to the peak.
double edge_ratio(const WaveFunction& psi, double fraction) {
  const std::size_t n = psi.values.size();
  const auto band = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));
  double peak = 0.0;
  for (const auto& v : psi.values) peak = std::max(peak, std::norm(v));
  double edge = 0.0;
  for (std::size_t j = 0; j < band; ++j)
    edge = std::max({edge, std::norm(psi.values[j]), std::norm(psi.values[n - 1 - j])});
  return edge / peak;
}

}  // namespace

void SimConfig::validate() const {
  grid.validate(true);
  if (grid.points_per_period() < 16)
    throw ConfigError("numerics: need at least 16 grid points per lattice period");
  if (!(dt > 0.0)) throw ConfigError("numerics: dt must be positive");
  if (!(t_final >= 0.0)) throw ConfigError("numerics: t_final must be non-negative");
  if (sample_stride == 0) throw ConfigError("numerics: sample_stride must be at least 1");
  const double kmax = grid.k_max();
  if (dt * kmax * kmax >= 0.5)
    throw ConfigError(fmt::format("numerics: dt * k_max^2 = {:.3g} violates the bound 0.5",
                                  dt * kmax * kmax));
  if (!(scaled.omega_B > 0.0) || !(scaled.kappa > 0.0))
    throw ConfigError("numerics: omega_B and kappa must be positive");
  const double samples_per_period = scaled.bloch_period() / (dt * static_cast<double>(sample_stride));
  if (samples_per_period < 20.0)
    throw ConfigError(fmt::format("numerics: {:.1f} samples per Bloch period, need at least 20",
                                  samples_per_period));
}

std::size_t SimConfig::total_steps() const {
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

void TraceRecord::reserve(std::size_t n) {
  t.reserve(n);
  alpha.reserve(n);
  n_photons.reserve(n);
  overlap.reserve(n);
  centroid.reserve(n);
  force.reserve(n);
  depth.reserve(n);
  norm.reserve(n);
}

WaveFunction init_wavepacket(const InitialState& initial, const WSBasis& basis) {
  WaveFunction psi;
  psi.grid = basis.grid;
  psi.values.assign(basis.grid.n_points, complex{});

  const auto add_site = [&](long site, double weight) {
    const auto& phi = basis.state(site);
    for (std::size_t j = 0; j < phi.size(); ++j) psi.values[j] += weight * phi[j];
  };

  switch (initial.kind) {
    case InitialState::Kind::localized: {
      const long slot = basis.slot_of(initial.center_site);
      if (slot < 0 || !basis.usable[static_cast<std::size_t>(slot)])
        throw ConfigError(fmt::format("initial state: site {} is not a usable interior site",
                                      initial.center_site));
      add_site(initial.center_site, 1.0);
      break;
    }
    case InitialState::Kind::delocalized: {
      const double w = initial.width_sites;
      if (!(w > 0.0)) throw ConfigError("initial state: width_sites must be positive");
      // Population that would sit on sites outside the usable range.
      double kept = 0.0;
      double dropped = 0.0;
      for (std::size_t i = 0; i < basis.size(); ++i) {
        const double x = static_cast<double>(basis.site_indices[i] - initial.center_site);
        const double weight = std::exp(-2.0 * x * x / (w * w));
        if (basis.usable[i]) {
          add_site(basis.site_indices[i], weight);
          kept += weight * weight;
        } else {
          dropped += weight * weight;
        }
      }
      const double reach = static_cast<double>(std::min(initial.center_site - basis.site_indices.front(),
                                                        basis.site_indices.back() - initial.center_site));
      dropped += std::exp(-4.0 * reach * reach / (w * w));
      if (!(kept > 0.0) || dropped > 1e-6 * kept)
        throw ConfigError(fmt::format(
            "initial state: a {}-site packet on site {} does not fit inside the usable sites",
            w, initial.center_site));
      break;
    }
    case InitialState::Kind::custom:
      if (initial.custom.size() != basis.grid.n_points)
        throw ConfigError("initial state: custom amplitudes must match the grid size");
      psi.values = initial.custom;
      break;
  }
  if (!(psi.norm() > 0.0)) throw ConfigError("initial state: zero wave function");
  psi.normalize();
  return psi;
}

double effective_detuning(const WaveFunction& psi, const ScaledParams& scaled) {
  return scaled.delta_c - scaled.n_atoms * scaled.u0 * overlap_c(psi);
}

CavityField steady_field(const WaveFunction& psi, const ScaledParams& scaled) {
  return steady_field(overlap_c(psi), scaled);
}

CavityField steady_field(double overlap, const ScaledParams& scaled) {
  const double delta_f = scaled.delta_c - scaled.n_atoms * scaled.u0 * overlap;
  return {scaled.eta / (scaled.kappa - I * delta_f)};
}

double lattice_force(const WaveFunction& psi, const CavityField& field, const ScaledParams& scaled) {
  double s = 0.0;
  for (std::size_t j = 0; j < psi.values.size(); ++j)
    s += std::norm(psi.values[j]) * std::sin(2.0 * psi.grid.z(j));
  return scaled.u0 * std::norm(field.alpha) * s * psi.grid.dz;
}

double energy(const WaveFunction& psi, const CavityField& field, const ScaledParams& scaled) {
  const auto& g = psi.grid;
  FftWorkspace ws(g.n_points);
  auto buf = ws.data();
  std::copy(psi.values.begin(), psi.values.end(), buf.begin());
  ws.forward();
  double kinetic = 0.0;
  for (std::size_t m = 0; m < g.n_points; ++m) {
    const double k = wavenumber(m, g);
    kinetic += k * k * std::norm(buf[m]);
  }
  kinetic *= g.dz / static_cast<double>(g.n_points);

  const double depth = scaled.u0 * std::norm(field.alpha);
  double potential = 0.0;
  for (std::size_t j = 0; j < g.n_points; ++j) {
    const double z = g.z(j);
    potential += std::norm(psi.values[j]) * (depth * cos2(z) - scaled.f * z);
  }
  return kinetic + potential * g.dz;
}

FieldStep integrate_field(complex alpha, double c_begin, double c_mid, double c_end,
                          const ScaledParams& scaled, double dt) {
  // Quadratic through (0, c_begin), (1/2, c_mid), (1, c_end), at 1/4 and 3/4.
  const double c_q1 = (3.0 * c_begin + 6.0 * c_mid - c_end) / 8.0;
  const double c_q3 = (-c_begin + 6.0 * c_mid + 3.0 * c_end) / 8.0;
  const double h = 0.5 * dt;
  FieldStep out;
  out.mid = rk4(alpha, c_begin, c_q1, c_mid, scaled, h);
  out.end = rk4(out.mid, c_mid, c_q3, c_end, scaled, h);
  return out;
}

struct SplitStepPropagator::Impl {
  ScaledParams scaled;
  SpatialGrid grid;
  double dt;
  bool backaction;
  std::size_t ppp;
  std::size_t shift;  // index offset of wavenumber 2
  complex edge_phase;  // exp(2 i z_min)

  FftWorkspace main;
  mutable FftWorkspace aux;
  mutable bool aux_is_kspace = false;

  std::vector<double> cos2_period;
  std::vector<complex> tilt;        // exp(i f z dt)
  std::vector<complex> half_kin;    // exp(-i k^2 dt / 2)
  std::vector<complex> half_kin_n;  // same, divided by n_points
  std::vector<complex> lattice;     // per-residue phase, rebuilt each step
  std::vector<complex> phase;       // full potential phase of the step

  // State: main holds psi after the first half kinetic step of the next step.
  complex alpha{};
  double c_now = 0.0;
  double c_frozen = 0.0;
  double t = 0.0;

  Impl(const ScaledParams& s, const SpatialGrid& g, double step, bool couple)
      : scaled(s), grid(g), dt(step), backaction(couple), ppp(g.points_per_period()),
        shift(g.n_sites()), edge_phase(std::polar(1.0, 2.0 * g.z_min)),
        main(g.n_points), aux(g.n_points) {
    cos2_period.resize(ppp);
    for (std::size_t r = 0; r < ppp; ++r) cos2_period[r] = cos2(static_cast<double>(r) * g.dz);
    tilt.resize(g.n_points);
    for (std::size_t j = 0; j < g.n_points; ++j) tilt[j] = std::polar(1.0, s.f * g.z(j) * dt);
    half_kin.resize(g.n_points);
    half_kin_n.resize(g.n_points);
    const double inv_n = 1.0 / static_cast<double>(g.n_points);
    for (std::size_t m = 0; m < g.n_points; ++m) {
      const double k = wavenumber(m, g);
      half_kin[m] = std::polar(1.0, -0.5 * k * k * dt);
      half_kin_n[m] = half_kin[m] * inv_n;
    }
    lattice.resize(ppp);
    phase.resize(g.n_points);
  }

  double overlap_real_space() {
    const double* x = reinterpret_cast<const double*>(main.data().data());
    double s = 0.0;
    for (std::size_t base = 0; base < grid.n_points; base += ppp) {
      const double* p = x + 2 * base;
      for (std::size_t r = 0; r < ppp; ++r)
        s += (p[2 * r] * p[2 * r] + p[2 * r + 1] * p[2 * r + 1]) * cos2_period[r];
    }
    return s * grid.dz;
  }

  // C from the k-space amplitudes of the integer-time state, scaled so that
  // psi_j = sum_m a_m exp(2 pi i j m / n).
  double overlap_kspace(std::span<const complex> a) const {
    const std::size_t n = a.size();
    const double* x = reinterpret_cast<const double*>(a.data());
    // sum_m conj(a_m) a_{m - shift}, indices mod n; only the real part of
    // the rotated sum is needed, so keep both parts.
    double re = 0.0;
    double im = 0.0;
    const auto accumulate = [&](std::size_t m, std::size_t other) {
      const double ar = x[2 * m], ai = x[2 * m + 1];
      const double br = x[2 * other], bi = x[2 * other + 1];
      re += ar * br + ai * bi;
      im += ar * bi - ai * br;
    };
    for (std::size_t m = 0; m < shift; ++m) accumulate(m, m + n - shift);
    for (std::size_t m = shift; m < n; ++m) accumulate(m, m - shift);
    const complex e2iz = edge_phase * complex{re, im} * static_cast<double>(n) * grid.dz;
    return 0.5 + 0.5 * e2iz.real();
  }

  static void multiply(std::span<complex> data, const std::vector<complex>& factor) {
    double* x = reinterpret_cast<double*>(data.data());
    const double* f = reinterpret_cast<const double*>(factor.data());
    for (std::size_t j = 0; j < data.size(); ++j) {
      const double xr = x[2 * j], xi = x[2 * j + 1];
      const double fr = f[2 * j], fi = f[2 * j + 1];
      x[2 * j] = xr * fr - xi * fi;
      x[2 * j + 1] = xr * fi + xi * fr;
    }
  }

  double coupling_overlap(double c) const { return backaction ? c : c_frozen; }

  void one_step(bool keep_state) {
    auto buf = main.data();
    const double c_mid = overlap_real_space();
    const double c_pred = 2.0 * c_mid - c_now;
    const FieldStep fs = integrate_field(alpha, coupling_overlap(c_now), coupling_overlap(c_mid),
                                         coupling_overlap(c_pred), scaled, dt);
    const double photons =
        (std::norm(alpha) + 4.0 * std::norm(fs.mid) + std::norm(fs.end)) / 6.0;
    const double depth_dt = scaled.u0 * photons * dt;
    for (std::size_t r = 0; r < ppp; ++r) lattice[r] = std::polar(1.0, -depth_dt * cos2_period[r]);
    for (std::size_t base = 0; base < grid.n_points; base += ppp)
      for (std::size_t r = 0; r < ppp; ++r) phase[base + r] = tilt[base + r] * lattice[r];
    multiply(buf, phase);

    main.forward();
    multiply(buf, half_kin_n);
    const double c_next = overlap_kspace(buf);
    if (keep_state) {
      std::copy(buf.begin(), buf.end(), aux.data().begin());
      aux_is_kspace = true;
    }
    multiply(buf, half_kin);
    main.backward();

    alpha = integrate_field(alpha, coupling_overlap(c_now), coupling_overlap(c_mid),
                            coupling_overlap(c_next), scaled, dt)
                .end;
    c_now = c_next;
    t += dt;
  }
};

SplitStepPropagator::SplitStepPropagator(const ScaledParams& scaled, const SpatialGrid& grid,
                                         double dt, bool backaction)
    : impl_(std::make_unique<Impl>(scaled, grid, dt, backaction)) {}
SplitStepPropagator::~SplitStepPropagator() = default;
SplitStepPropagator::SplitStepPropagator(SplitStepPropagator&&) noexcept = default;
SplitStepPropagator& SplitStepPropagator::operator=(SplitStepPropagator&&) noexcept = default;

void SplitStepPropagator::reset(const WaveFunction& psi, const CavityField& field,
                                std::optional<double> frozen_overlap) {
  auto& p = *impl_;
  if (!(psi.grid == p.grid)) throw ConfigError("propagator: wave function grid does not match");
  p.alpha = field.alpha;
  p.t = psi.time;
  p.c_now = overlap_c(psi);
  p.c_frozen = frozen_overlap.value_or(p.c_now);

  auto aux = p.aux.data();
  std::copy(psi.values.begin(), psi.values.end(), aux.begin());
  p.aux_is_kspace = false;

  auto buf = p.main.data();
  std::copy(psi.values.begin(), psi.values.end(), buf.begin());
  p.main.forward();
  for (std::size_t m = 0; m < p.grid.n_points; ++m) buf[m] *= p.half_kin_n[m];
  p.main.backward();
}

void SplitStepPropagator::advance(std::size_t steps) {
  for (std::size_t s = 0; s < steps; ++s) impl_->one_step(s + 1 == steps);
}

WaveFunction SplitStepPropagator::wavefunction() const {
  auto& p = *impl_;
  if (p.aux_is_kspace) {
    p.aux.backward();
    p.aux_is_kspace = false;
  }
  WaveFunction psi;
  psi.grid = p.grid;
  psi.time = p.t;
  auto aux = p.aux.data();
  psi.values.assign(aux.begin(), aux.end());
  return psi;
}

CavityField SplitStepPropagator::field() const { return {impl_->alpha}; }
double SplitStepPropagator::time() const { return impl_->t; }
double SplitStepPropagator::overlap() const { return impl_->c_now; }

std::pair<WaveFunction, CavityField> step(const WaveFunction& psi, const CavityField& field,
                                          const ScaledParams& scaled, double dt) {
  SplitStepPropagator prop(scaled, psi.grid, dt);
  prop.reset(psi, field);
  prop.advance(1);
  return {prop.wavefunction(), prop.field()};
}

TraceRecord run(const SimConfig& config, const WSBasis& basis) {
  config.validate();
  if (!(basis.grid == config.grid)) throw ConfigError("run: basis and simulation grids differ");

  const WaveFunction psi0 = init_wavepacket(config.initial_state, basis);
  const double c_ref = config.reference_overlap.value_or(overlap_c(psi0));
  SplitStepPropagator prop(config.scaled, config.grid, config.dt, config.backaction);
  prop.reset(psi0, steady_field(c_ref, config.scaled), c_ref);

  const std::size_t steps = config.total_steps();
  const std::size_t stride = config.sample_stride;
  TraceRecord trace;
  trace.sample_dt = config.dt * static_cast<double>(stride);
  trace.reserve(steps / stride + 1);

  const auto sample = [&]() {
    const WaveFunction psi = prop.wavefunction();
    const CavityField field = prop.field();
    check_finite(psi, field);
    const double edge = edge_ratio(psi, config.edge_fraction);
    trace.max_edge_ratio = std::max(trace.max_edge_ratio, edge);
    if (edge > config.edge_tolerance)
      throw NumericalError(fmt::format(
          "meanfield: density reached the box edge at t = {:.6g} (edge/peak = {:.3g}, limit {:.1g}); "
          "enlarge the grid or shorten the run",
          psi.time, edge, config.edge_tolerance));
    const double n = std::norm(field.alpha);
    trace.t.push_back(psi.time);
    trace.alpha.push_back(field.alpha);
    trace.n_photons.push_back(n);
    trace.overlap.push_back(overlap_c(psi));
    trace.centroid.push_back(psi.centroid());
    trace.force.push_back(lattice_force(psi, field, config.scaled));
    trace.depth.push_back(config.scaled.u0 * n);
    trace.norm.push_back(psi.norm());
    if (config.record_coherence) {
      const auto pr = project_onto_ws(psi, basis);
      complex b{};
      double total = 0.0;
      for (std::size_t i = 0; i < pr.coefficients.size(); ++i) {
        total += std::norm(pr.coefficients[i]);
        if (i + 1 < pr.coefficients.size()) b += std::conj(pr.coefficients[i]) * pr.coefficients[i + 1];
      }
      trace.coherence.push_back(total > 0.0 ? b / total : complex{});
    }
  };

  sample();
  for (std::size_t done = 0; done + stride <= steps; done += stride) {
    prop.advance(stride);
    sample();
  }
  return trace;
}

}  // namespace blochcav
