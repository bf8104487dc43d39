#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <blochcav/errors.hpp>
#include <blochcav/meanfield.hpp>

#include "support.hpp"

namespace blochcav {
namespace {

constexpr double pi = std::numbers::pi;

// Reference parameters with the static field at depth s0 for delta0.
ScaledParams pumped(double s0, double delta0, double gamma0) {
  auto s = test::reference_scaled();
  s.delta_c = delta0 + s.collective_shift() * gamma0;
  s.eta = std::sqrt(s0 / s.u0 * (s.kappa * s.kappa + delta0 * delta0));
  return s;
}

WaveFunction gaussian(const SpatialGrid& grid, double z0, double sigma) {
  WaveFunction psi{grid, std::vector<complex>(grid.n_points), 0.0};
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    const double x = (grid.z(j) - z0) / sigma;
    psi.values[j] = std::exp(-0.25 * x * x);
  }
  psi.normalize();
  return psi;
}

TEST(MeanField, OverlapAndForceOfGaussianDensity) {
  // |psi|^2 Gaussian of variance sigma^2: <cos^2 z> = (1 + cos 2z0 e^{-2 sigma^2}) / 2,
  // <sin 2z> = sin 2z0 e^{-2 sigma^2}
  const auto grid = SpatialGrid::lattice(32, 32);
  auto s = test::reference_scaled();
  const CavityField field{complex(40.0, -25.0)};
  for (double z0 : {0.0, 0.3, 1.1, -2.0}) {
    const double sigma = 0.7;
    const auto psi = gaussian(grid, z0, sigma);
    const double damp = std::exp(-2.0 * sigma * sigma);
    EXPECT_NEAR(overlap_c(psi), 0.5 * (1.0 + std::cos(2.0 * z0) * damp), 1e-12);
    EXPECT_NEAR(lattice_force(psi, field, s), s.u0 * std::norm(field.alpha) * std::sin(2.0 * z0) * damp, 1e-12);
    EXPECT_NEAR(psi.centroid(), z0, 1e-12);
  }
}

TEST(MeanField, FrozenAtomFieldMatchesClosedForm) {
  // C fixed: alpha(t) = a_ss + (alpha(0) - a_ss) exp(-(kappa - i Delta_f) t)
  auto s = pumped(-3.0, 1.2 * test::reference_scaled().kappa, 0.71);
  const double c = 0.63;
  const double delta_f = s.delta_c - s.collective_shift() * c;
  const complex rate(s.kappa, -delta_f);
  const complex a_ss = s.eta / rate;
  const complex a0(3.0, -150.0);
  const double dt = s.bloch_period() / 400.0;
  complex a = a0;
  double worst = 0.0;
  for (int i = 1; i <= 4000; ++i) {
    a = integrate_field(a, c, c, c, s, dt).end;
    const complex exact = a_ss + (a0 - a_ss) * std::exp(-rate * (i * dt));
    worst = std::max(worst, std::abs(a - exact) / std::abs(a_ss));
  }
  EXPECT_LT(worst, 1e-8);
  EXPECT_NEAR(std::abs(steady_field(c, s).alpha - a_ss), 0.0, 1e-12 * std::abs(a_ss));
}

class MeanFieldRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto s = test::reference_scaled();
    grid = SpatialGrid::lattice(64, 16);
    basis = new WSBasis(compute_ws_basis(-3.0, s.omega_B, grid, 64));
  }
  static void TearDownTestSuite() { delete basis; }

  static SimConfig config(double delta0_kappa, double periods, bool backaction) {
    const double k = test::reference_scaled().kappa;
    SimConfig c;
    c.scaled = pumped(-3.0, delta0_kappa * k, basis->elements.gamma0);
    c.grid = grid;
    c.dt = c.scaled.bloch_period() / 24000.0;
    c.sample_stride = 240;
    c.initial_state.width_sites = 10.0;
    c.t_final = periods * c.scaled.bloch_period();
    c.backaction = backaction;
    c.reference_overlap = basis->elements.gamma0;
    return c;
  }

  static inline SpatialGrid grid;
  static inline WSBasis* basis = nullptr;
};

TEST_F(MeanFieldRun, NormIsConserved) {
  const auto tr = run(config(-1.0, 3.0, true), *basis);
  double worst = 0.0;
  for (double n : tr.norm) worst = std::max(worst, std::abs(n - tr.norm.front()));
  EXPECT_LT(worst, 1e-8);
  EXPECT_NEAR(tr.norm.front(), 1.0, 1e-12);
}

TEST_F(MeanFieldRun, InitialDepthIsTheBasisDepth) {
  const auto tr = run(config(1.3, 0.1, true), *basis);
  EXPECT_NEAR(tr.depth.front(), -3.0, 1e-12);
}

TEST_F(MeanFieldRun, StaticLatticeIsBlochPeriodic) {
  const auto c = config(-0.7, 3.0, false);
  const auto tr = run(c, *basis);
  const std::size_t per = 100;
  double worst = 0.0;
  for (std::size_t i = 0; i + per < tr.size(); ++i)
    worst = std::max(worst, std::abs(tr.centroid[i + per] - tr.centroid[i]));
  EXPECT_LT(worst, 1e-3 * pi);
  // frozen lattice: depth never moves
  for (double d : tr.depth) EXPECT_NEAR(d, -3.0, 1e-10);
}

TEST_F(MeanFieldRun, StaticLatticeConservesEnergy) {
  auto c = config(-0.7, 1.0, false);
  const auto psi0 = init_wavepacket(c.initial_state, *basis);
  const CavityField field = steady_field(basis->elements.gamma0, c.scaled);
  SplitStepPropagator prop(c.scaled, c.grid, c.dt, false);
  prop.reset(psi0, field, basis->elements.gamma0);
  const double e0 = energy(psi0, field, c.scaled);
  prop.advance(12000);
  const double e1 = energy(prop.wavefunction(), prop.field(), c.scaled);
  EXPECT_NEAR(e1, e0, 1e-6 * std::abs(e0));
}

TEST_F(MeanFieldRun, EdgeViolationIsANumericalError) {
  auto c = config(1.3, 0.2, true);
  c.edge_tolerance = 1e-14;
  EXPECT_THROW(run(c, *basis), NumericalError);
}

TEST(MeanFieldConfig, RejectsBadNumerics) {
  SimConfig c;
  c.scaled = test::reference_scaled();
  c.grid = SpatialGrid::lattice(64, 16);
  c.dt = c.scaled.bloch_period() / 24000.0;
  c.sample_stride = 240;
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.sample_stride = 2400;  // 10 samples per period
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.dt = 1.0;  // beyond the kinetic phase bound
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.grid = SpatialGrid::lattice(64, 8);
  EXPECT_THROW(bad.validate(), ConfigError);
}

}  // namespace
}  // namespace blochcav
