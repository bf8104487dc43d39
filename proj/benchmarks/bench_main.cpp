#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include <blochcav/analysis.hpp>
#include <blochcav/ladder.hpp>
#include <blochcav/meanfield.hpp>
#include <blochcav/wannier_stark.hpp>

namespace {

using namespace blochcav;

ScaledParams reference(double gamma0) {
  auto p = strontium_reference();
  p.bias_force = bias_force_for_bloch_frequency(p, constants::two_pi * 744.5);
  auto s = scale(p);
  const double delta0 = s.kappa;
  s.delta_c = delta0 + s.collective_shift() * gamma0;
  s.eta = std::sqrt(-3.0 / s.u0 * (s.kappa * s.kappa + delta0 * delta0));
  return s;
}

void BM_WannierStarkBasis(benchmark::State& state) {
  const auto s = reference(0.7);
  const auto grid = SpatialGrid::lattice(static_cast<std::size_t>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(compute_ws_basis(-3.0, s.omega_B, grid, grid.n_sites()));
}
BENCHMARK(BM_WannierStarkBasis)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SplitStep(benchmark::State& state) {
  const auto sites = static_cast<std::size_t>(state.range(0));
  const auto grid = SpatialGrid::lattice(sites, 16);
  const auto probe = reference(0.7);
  const auto basis = compute_ws_basis(-3.0, probe.omega_B, grid, sites);
  const auto s = reference(basis.elements.gamma0);
  InitialState init;
  init.width_sites = 10.0;
  const auto psi = init_wavepacket(init, basis);
  SplitStepPropagator prop(s, grid, s.bloch_period() / 24000.0);
  prop.reset(psi, steady_field(basis.elements.gamma0, s));
  for (auto _ : state) prop.advance(100);
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_SplitStep)->Arg(64)->Arg(128)->Arg(256);

void BM_LadderStep(benchmark::State& state) {
  const auto grid = SpatialGrid::lattice(64, 16);
  const auto probe = reference(0.7);
  const auto basis = compute_ws_basis(-3.0, probe.omega_B, grid, 64);
  const auto s = reference(basis.elements.gamma0);
  InitialState init;
  init.width_sites = 10.0;
  const auto p = project_onto_ws(init_wavepacket(init, basis), basis);
  auto ladder = make_ladder_state(p.coefficients, p.first_site, 30, nearest_neighbour(basis.elements), s);
  const double dt = s.bloch_period() / 400.0;
  for (auto _ : state) evolve_ladder(ladder, dt);
}
BENCHMARK(BM_LadderStep);

void BM_Spectrum(benchmark::State& state) {
  // 100 Bloch periods at 100 samples each
  const double w = 0.1557;
  const double dt = constants::two_pi / w / 100.0;
  std::vector<complex> x(10000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) * dt;
    x[i] = complex(100.0, 0.0) + 3.0 * std::exp(complex(0.0, -w * t)) + std::exp(complex(0.0, w * t));
  }
  for (auto _ : state) benchmark::DoNotOptimize(psd(x, dt, w / 100.0));
}
BENCHMARK(BM_Spectrum)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
