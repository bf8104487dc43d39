#include "blochcav/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <spdlog/fmt/fmt.h>

#include "blochcav/errors.hpp"

namespace blochcav {
namespace {

constexpr complex I{0.0, 1.0};

// Interaction-picture state: a_n and delta_alpha.
struct Slice {
  std::vector<complex> a;
  complex da;
};

double fluctuation(complex alpha0, complex da) {
  return 2.0 * (std::conj(alpha0) * da).real() + std::norm(da);
}

// Coherence sums l_m = sum_i a_i^* a_{i+m} for m = 1..range.
void links(const Slice& y, std::size_t range, std::vector<complex>& out) {
  const std::size_t n = y.a.size();
  out.assign(range, complex{});
  for (std::size_t m = 1; m <= range; ++m)
    for (std::size_t i = 0; i + m < n; ++i) out[m - 1] += std::conj(y.a[i]) * y.a[i + m];
}

void rhs(const Slice& y, double t, const LadderState& s, Slice& out) {
  const auto& k = s.couplings;
  const std::size_t range = k.range();
  const std::size_t n = y.a.size();
  const double u0 = s.scaled.u0;

  // down[m - 1] = exp(-i m omega_B t)
  std::vector<complex> down(range);
  for (std::size_t m = 1; m <= range; ++m)
    down[m - 1] = std::polar(1.0, -static_cast<double>(m) * s.scaled.omega_B * t);

  std::vector<complex> l;
  links(y, range, l);
  double coherence = 0.0;  // sum_m gamma_m (b_m + b_m^*)
  for (std::size_t m = 0; m < range; ++m) coherence += k.gamma[m] * 2.0 * (down[m] * l[m]).real();
  const double dn = fluctuation(s.alpha0, y.da);
  const double compression = s.scaled.n_atoms * k.gamma0_slope * u0 * dn;

  out.da = (-s.scaled.kappa + I * s.delta0()) * y.da - I * u0 * (s.alpha0 + y.da) * (coherence + compression);
  out.a.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    complex hop{};
    for (std::size_t m = 1; m <= range; ++m) {
      if (i + m < n) hop += k.gamma[m - 1] * down[m - 1] * y.a[i + m];
      if (i >= m) hop += k.gamma[m - 1] * std::conj(down[m - 1]) * y.a[i - m];
    }
    out.a[i] = -I * u0 * dn * hop;
  }
}

void axpy(const Slice& y, double h, const Slice& k, Slice& out) {
  out.a.resize(y.a.size());
  for (std::size_t i = 0; i < y.a.size(); ++i) out.a[i] = y.a[i] + h * k.a[i];
  out.da = y.da + h * k.da;
}

}  // namespace

double LadderState::atom_number() const {
  double s = 0.0;
  for (const auto& v : d) s += std::norm(v);
  return s;
}

double LadderState::delta0() const {
  return scaled.delta_c - scaled.n_atoms * scaled.u0 * couplings.gamma0;
}

LadderCouplings nearest_neighbour(const MatrixElements& elements) {
  LadderCouplings k;
  k.gamma0 = elements.gamma0;
  k.Z0 = elements.Z0;
  k.gamma = {elements.gamma1};
  k.Z = {elements.Z1};
  return k;
}

LadderCouplings extended_couplings(const WSBasis& basis, std::size_t range, bool depth_response,
                                   const WSOptions& options) {
  if (range == 0) throw ConfigError("ladder: coupling range must be at least 1");
  if (basis.slot_of(0) < 0 || basis.slot_of(static_cast<long>(range)) < 0)
    throw ConfigError(fmt::format("ladder: basis does not cover sites 0..{}", range));
  LadderCouplings k = nearest_neighbour(basis.elements);
  k.gamma.assign(range, 0.0);
  k.Z.assign(range, 0.0);
  const auto& a = basis.state(0);
  const auto& g = basis.grid;
  for (std::size_t m = 1; m <= range; ++m) {
    const auto& b = basis.state(static_cast<long>(m));
    double c = 0.0;
    double z = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double x = g.z(j);
      const double cs = std::cos(x);
      c += a[j] * b[j] * cs * cs;
      z += a[j] * b[j] * x;
    }
    k.gamma[m - 1] = c * g.dz;
    k.Z[m - 1] = z * g.dz;
  }
  if (depth_response) {
    constexpr double h = 0.05;
    const auto n_sites = std::min<std::size_t>(basis.size(), 2 * options.edge_margin + 4);
    const auto grid = SpatialGrid::lattice(n_sites, g.points_per_period());
    const double up = compute_ws_basis(basis.s0 + h, basis.omega_B, grid, n_sites, options).elements.gamma0;
    const double dn = compute_ws_basis(basis.s0 - h, basis.omega_B, grid, n_sites, options).elements.gamma0;
    k.gamma0_slope = (up - dn) / (2.0 * h);
  }
  return k;
}

complex static_field(double eta, double kappa, double delta0) {
  if (!(kappa > 0.0)) throw ConfigError("static_field: kappa must be positive");
  return eta / (kappa - I * delta0);
}

double photon_fluctuation(const LadderState& state) {
  return fluctuation(state.alpha0, state.delta_alpha);
}

BlochOscillatorObservables observables(const LadderState& state) {
  BlochOscillatorObservables o;
  for (std::size_t i = 0; i < state.d.size(); ++i) {
    const double site = static_cast<double>(state.first_site + static_cast<long>(i));
    o.n_M += site * std::norm(state.d[i]);
    if (i + 1 < state.d.size()) o.b_M += std::conj(state.d[i]) * state.d[i + 1];
  }
  const double atoms = state.atom_number();
  o.sigma1 = atoms > 0.0 ? std::abs(o.b_M) / atoms : 0.0;
  o.theta1 = std::arg(o.b_M);
  return o;
}

double position_from_ladder(const LadderState& state) {
  const auto& k = state.couplings;
  const auto& d = state.d;
  const double atoms = state.atom_number();
  double z = k.Z0 + std::numbers::pi * observables(state).n_M / atoms;
  for (std::size_t m = 1; m <= k.range(); ++m) {
    complex b{};
    for (std::size_t i = 0; i + m < d.size(); ++i) b += std::conj(d[i]) * d[i + m];
    z += k.Z[m - 1] * 2.0 * b.real() / atoms;
  }
  return z;
}

void evolve_ladder(LadderState& state, double dt) {
  const std::size_t n = state.d.size();
  const double w = state.scaled.omega_B;
  const double t = state.time;

  Slice y;
  y.a.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double site = static_cast<double>(state.first_site + static_cast<long>(i));
    y.a[i] = std::polar(1.0, site * w * t) * state.d[i];
  }
  y.da = state.delta_alpha;

  Slice k1, k2, k3, k4, tmp;
  rhs(y, t, state, k1);
  axpy(y, 0.5 * dt, k1, tmp);
  rhs(tmp, t + 0.5 * dt, state, k2);
  axpy(y, 0.5 * dt, k2, tmp);
  rhs(tmp, t + 0.5 * dt, state, k3);
  axpy(y, dt, k3, tmp);
  rhs(tmp, t + dt, state, k4);

  const double h6 = dt / 6.0;
  const double t1 = t + dt;
  for (std::size_t i = 0; i < n; ++i) {
    const complex a = y.a[i] + h6 * (k1.a[i] + 2.0 * k2.a[i] + 2.0 * k3.a[i] + k4.a[i]);
    const double site = static_cast<double>(state.first_site + static_cast<long>(i));
    state.d[i] = std::polar(1.0, -site * w * t1) * a;
  }
  state.delta_alpha = y.da + h6 * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da);
  state.time = t1;
}

LadderState make_ladder_state(const std::vector<complex>& coefficients, long first_site,
                              std::size_t pad_sites, const LadderCouplings& couplings,
                              const ScaledParams& scaled) {
  if (coefficients.empty()) throw ConfigError("ladder: no initial coefficients");
  if (couplings.range() == 0 || couplings.Z.size() != couplings.range())
    throw ConfigError("ladder: couplings need matching gamma and Z entries");
  LadderState s;
  s.couplings = couplings;
  s.scaled = scaled;
  s.first_site = first_site - static_cast<long>(pad_sites);
  s.d.assign(coefficients.size() + 2 * pad_sites, complex{});
  double norm = 0.0;
  for (const auto& c : coefficients) norm += std::norm(c);
  if (!(norm > 0.0)) throw ConfigError("ladder: initial coefficients vanish");
  const double scale = std::sqrt(scaled.n_atoms / norm);
  for (std::size_t i = 0; i < coefficients.size(); ++i) s.d[pad_sites + i] = scale * coefficients[i];
  s.alpha0 = static_field(scaled.eta, scaled.kappa, s.delta0());
  return s;
}

LadderTrace run_ladder(LadderState state, const LadderConfig& config) {
  if (!(config.dt > 0.0) || config.sample_stride == 0)
    throw ConfigError("ladder: dt and sample_stride must be positive");
  if (state.d.size() < 4) throw ConfigError("ladder: need at least four sites");

  const double atoms0 = state.atom_number();
  LadderTrace trace;
  trace.sample_dt = config.dt * static_cast<double>(config.sample_stride);

  const auto sample = [&]() {
    const auto o = observables(state);
    const double atoms = state.atom_number();
    if (!std::isfinite(atoms) || !std::isfinite(std::abs(state.delta_alpha)))
      throw NumericalError(fmt::format("ladder: state is not finite at t = {}", state.time));
    const std::size_t n = state.d.size();
    const double edge = std::norm(state.d[0]) + std::norm(state.d[1]) + std::norm(state.d[n - 2]) +
                        std::norm(state.d[n - 1]);
    if (edge > config.edge_tolerance * atoms0)
      throw NumericalError(fmt::format(
          "ladder: population {:.3g} reached the ends of the site range at t = {:.6g}; add sites",
          edge / atoms0, state.time));
    trace.t.push_back(state.time);
    trace.n_M.push_back(o.n_M);
    trace.b_M.push_back(o.b_M);
    trace.delta_alpha.push_back(state.delta_alpha);
    trace.delta_n.push_back(photon_fluctuation(state));
    trace.centroid.push_back(position_from_ladder(state));
    trace.atoms.push_back(atoms);
  };

  const auto steps = static_cast<std::size_t>(std::llround(config.t_final / config.dt));
  sample();
  for (std::size_t done = 0; done + config.sample_stride <= steps; done += config.sample_stride) {
    for (std::size_t k = 0; k < config.sample_stride; ++k) evolve_ladder(state, config.dt);
    sample();
  }
  return trace;
}

}  // namespace blochcav
