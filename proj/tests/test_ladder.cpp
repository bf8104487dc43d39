#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <blochcav/analysis.hpp>
#include <blochcav/errors.hpp>
#include <blochcav/ladder.hpp>
#include <blochcav/meanfield.hpp>

#include "support.hpp"

namespace blochcav {
namespace {

constexpr double pi = std::numbers::pi;

class Ladder : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto s = test::reference_scaled();
    grid = SpatialGrid::lattice(64, 16);
    basis = new WSBasis(compute_ws_basis(-3.0, s.omega_B, grid, 64));
  }
  static void TearDownTestSuite() { delete basis; }

  static ScaledParams pumped(double delta0_kappa) {
    auto s = test::reference_scaled();
    const double d0 = delta0_kappa * s.kappa;
    s.delta_c = d0 + s.collective_shift() * basis->elements.gamma0;
    s.eta = std::sqrt(-3.0 / s.u0 * (s.kappa * s.kappa + d0 * d0));
    return s;
  }

  static Projection packet(InitialState::Kind kind = InitialState::Kind::delocalized) {
    InitialState init;
    init.kind = kind;
    init.width_sites = 10.0;
    return project_onto_ws(init_wavepacket(init, *basis), *basis);
  }

  static LadderTrace run(double delta0_kappa, double periods, const Projection& p, const LadderCouplings& k) {
    const auto s = pumped(delta0_kappa);
    LadderConfig c;
    c.dt = s.bloch_period() / 400.0;
    c.sample_stride = 4;
    c.t_final = periods * s.bloch_period();
    return run_ladder(make_ladder_state(p.coefficients, p.first_site, 30, k, s), c);
  }

  static double drift(const LadderTrace& tr, double omega_B) {
    return numeric_transport_velocity(tr.centroid, tr.sample_dt, omega_B, 0.0).sites_per_period;
  }

  static inline SpatialGrid grid;
  static inline WSBasis* basis = nullptr;
};

TEST_F(Ladder, AtomNumberIsConserved) {
  const auto tr = run(-1.0, 10.0, packet(), nearest_neighbour(basis->elements));
  double worst = 0.0;
  for (double n : tr.atoms) worst = std::max(worst, std::abs(n / tr.atoms.front() - 1.0));
  EXPECT_LT(worst, 1e-8);
  EXPECT_NEAR(tr.atoms.front(), test::reference_scaled().n_atoms, 1e-9);
}

TEST_F(Ladder, StaticFieldIsTheSteadyStateWithoutCoherence) {
  // One occupied site: no coherence, so delta_alpha stays zero and nothing moves.
  const auto tr = run(1.3, 3.0, packet(InitialState::Kind::localized), nearest_neighbour(basis->elements));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_LT(std::abs(tr.delta_alpha[i]), 1e-12);
    EXPECT_NEAR(tr.n_M[i], tr.n_M.front(), 1e-9);
  }
  const auto s = pumped(1.3);
  const complex a0 = static_field(s.eta, s.kappa, 1.3 * s.kappa);
  EXPECT_NEAR(s.u0 * std::norm(a0), -3.0, 1e-12);
}

TEST_F(Ladder, PositionMatchesWaveFunctionCentroid) {
  // With enough coupling range the ladder position is the exact <z>.
  InitialState init;
  init.width_sites = 10.0;
  const auto psi = init_wavepacket(init, *basis);
  const auto p = project_onto_ws(psi, *basis);
  const auto k = extended_couplings(*basis, 20, false);
  const auto state = make_ladder_state(p.coefficients, p.first_site, 20, k, pumped(1.0));
  EXPECT_NEAR(position_from_ladder(state), psi.centroid(), 1e-6);
}

TEST_F(Ladder, CavityFieldFollowsTheBesselSeries) {
  // Early on the coherence is still that of the initial packet, so the
  // fluctuation is the driven solution with u1 = 2 N u0 gamma1 sigma1.
  const auto p = packet();
  const auto s = pumped(1.0);
  const auto tr = run(1.0, 1.0, p, nearest_neighbour(basis->elements));
  const double u1 = 2.0 * s.collective_shift() * basis->elements.gamma1 * p.sigma1();
  const complex a0 = static_field(s.eta, s.kappa, 1.0 * s.kappa);
  // skip the cavity transient (about 3 / kappa)
  const std::size_t i0 = static_cast<std::size_t>(std::ceil(8.0 / s.kappa / tr.sample_dt));
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = i0; i < tr.size(); ++i) {
    const complex model = jacobi_anger_field(s, 1.0 * s.kappa, u1, -p.theta1(), a0, tr.t[i]);
    worst = std::max(worst, std::abs(tr.delta_alpha[i] - model));
    scale = std::max(scale, std::abs(model));
  }
  EXPECT_LT(worst / scale, 0.05);
}

TEST_F(Ladder, DriftIsOddInDetuningAndMatchesTheClosedForm) {
  const auto p = packet();
  const auto k = nearest_neighbour(basis->elements);
  const double w = test::reference_scaled().omega_B;
  const double up = drift(run(1.0, 10.0, p, k), w);
  const double down = drift(run(-1.0, 10.0, p, k), w);
  EXPECT_GT(up, 0.1);
  EXPECT_NEAR(up, -down, 1e-3 * std::abs(up));

  const auto s = pumped(1.0);
  const auto v = analytic_transport_velocity(s, basis->elements, p.sigma1(), -3.0, s.kappa);
  EXPECT_NEAR(up / v.sites_per_period, 1.0, 0.02);
}

TEST_F(Ladder, RejectsBadSetup) {
  const auto p = packet();
  auto k = nearest_neighbour(basis->elements);
  k.Z.clear();
  EXPECT_THROW(make_ladder_state(p.coefficients, p.first_site, 5, k, pumped(1.0)), ConfigError);
  EXPECT_THROW(make_ladder_state({}, 0, 5, nearest_neighbour(basis->elements), pumped(1.0)), ConfigError);
}

TEST_F(Ladder, PopulatedEndsAreANumericalError) {
  const auto s = pumped(1.3);
  LadderConfig c;
  c.dt = s.bloch_period() / 400.0;
  c.t_final = 5.0 * s.bloch_period();
  // no padding: a flat five-site state already sits in the end sites
  const std::vector<complex> flat(5, complex(1.0 / std::sqrt(5.0), 0.0));
  EXPECT_THROW(run_ladder(make_ladder_state(flat, -2, 0, nearest_neighbour(basis->elements), s), c), NumericalError);
}

}  // namespace
}  // namespace blochcav
