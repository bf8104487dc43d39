#pragma once

#include <cstddef>
#include <vector>

#include "blochcav/grid.hpp"
#include "blochcav/units.hpp"
#include "blochcav/wannier_stark.hpp"

namespace blochcav {

/// Couplings of the reduced model. The nearest-neighbour form (one entry in
/// `gamma` and `Z`, rigid WS states) is the standard optomechanical ladder.
/// Longer ranges add <phi_n|cos^2|phi_{n+m}> hops and the matching terms in
/// C and <z>; `gamma0_slope` lets the on-site overlap follow the lattice
/// depth, which feeds back on the cavity as a Kerr-like shift.
struct LadderCouplings {
  double gamma0 = 0.0;
  double Z0 = 0.0;
  std::vector<double> gamma;  // gamma[m - 1] = <phi_n| cos^2 z |phi_{n+m}>
  std::vector<double> Z;      // Z[m - 1] = <phi_n| z |phi_{n+m}>
  double gamma0_slope = 0.0;  // d gamma0 / d s0

  [[nodiscard]] std::size_t range() const { return gamma.size(); }
};

LadderCouplings nearest_neighbour(const MatrixElements& elements);

/// Couplings up to `range` neighbours read off `basis`. With `depth_response`
/// the slope of gamma0 is taken by central differences of two extra bases
/// at s0 +- 0.05.
LadderCouplings extended_couplings(const WSBasis& basis, std::size_t range, bool depth_response,
                                   const WSOptions& options = {});

/// Reduced model: Wannier-Stark amplitudes d_n (sum |d_n|^2 = N) coupled to
/// the cavity fluctuation delta_alpha around the static field alpha0.
/// The global phase driven by gamma0 is removed exactly and not stored.
struct LadderState {
  long first_site = 0;
  std::vector<complex> d;  // Schroedinger picture, includes exp(-i n omega_B t)
  complex delta_alpha{};
  double time = 0.0;
  complex alpha0{};
  LadderCouplings couplings;
  ScaledParams scaled;

  [[nodiscard]] double atom_number() const;
  [[nodiscard]] long last_site() const { return first_site + static_cast<long>(d.size()) - 1; }
  /// delta0 = Delta_c - N u0 gamma0.
  [[nodiscard]] double delta0() const;
};

struct BlochOscillatorObservables {
  double n_M = 0.0;   // sum n |d_n|^2
  complex b_M{};      // sum d_n^* d_{n+1}
  double sigma1 = 0.0;  // |b_M| / N
  double theta1 = 0.0;  // arg b_M
};

/// eta / (kappa - i delta0).
complex static_field(double eta, double kappa, double delta0);

/// alpha0^* da + alpha0 da^* + |da|^2, without linearization.
double photon_fluctuation(const LadderState& state);

BlochOscillatorObservables observables(const LadderState& state);

/// Z0 + pi n_M / N + Z1 (b_M + b_M^*) / N, plus the longer-range terms when
/// present. The amplitudes already carry the dynamical phases, so no further
/// time factor enters the coherence term.
double position_from_ladder(const LadderState& state);

/// One RK4 step of the ladder and cavity equations, integrated in the
/// interaction picture a_n = exp(i n omega_B t) d_n so that the step size
/// is set by the slow coupling, not by n omega_B.
void evolve_ladder(LadderState& state, double dt);

/// Ladder state from WS coefficients c_n (unit norm) on consecutive sites
/// starting at `first_site`, padded by `pad_sites` empty sites on each side.
/// delta_alpha starts at 0 and alpha0 is the static field for depth
/// s0 = u0 |alpha0|^2 (eta is taken from `scaled`).
LadderState make_ladder_state(const std::vector<complex>& coefficients, long first_site,
                              std::size_t pad_sites, const LadderCouplings& couplings,
                              const ScaledParams& scaled);

struct LadderConfig {
  double dt = 0.0;
  double t_final = 0.0;
  std::size_t sample_stride = 1;
  /// Population allowed in the two outermost sites, relative to N.
  double edge_tolerance = 1e-6;
};

struct LadderTrace {
  std::vector<double> t;
  std::vector<double> n_M;
  std::vector<complex> b_M;
  std::vector<complex> delta_alpha;
  std::vector<double> delta_n;
  std::vector<double> centroid;
  std::vector<double> atoms;
  double sample_dt = 0.0;

  [[nodiscard]] std::size_t size() const { return t.size(); }
};

/// Integrates from `initial`, sampling every `sample_stride` steps. Throws
/// NumericalError on NaN or when the ladder ends become populated.
LadderTrace run_ladder(LadderState initial, const LadderConfig& config);

}  // namespace blochcav
