#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "blochcav/grid.hpp"
#include "blochcav/units.hpp"
#include "blochcav/wannier_stark.hpp"

namespace blochcav {

struct CavityField {
  complex alpha{};
};

struct InitialState {
  enum class Kind { delocalized, localized, custom };
  Kind kind = Kind::delocalized;
  long center_site = 0;
  /// Full width of the site-population envelope at 1/e of its peak.
  double width_sites = 20.0;
  /// Grid values for Kind::custom; normalized on use.
  std::vector<complex> custom;
};

struct SimConfig {
  ScaledParams scaled;
  SpatialGrid grid;
  double dt = 1e-3;
  double t_final = 0.0;
  std::size_t sample_stride = 1;
  InitialState initial_state;
  /// false holds Delta_f at its initial value: the field, and hence the
  /// lattice, stays at the static solution (control run without backaction).
  bool backaction = true;
  /// Overlap that fixes the initial field eta / (kappa - i (Delta_c - N u0 C))
  /// and, without backaction, the frozen Delta_f. Unset means C of the
  /// initial state (field in equilibrium with the atoms); gamma0 gives the
  /// static field of the reduced model, with depth exactly the basis s0.
  std::optional<double> reference_overlap;
  /// Density in the outer `edge_fraction` of the box must stay below
  /// `edge_tolerance` times the peak density. The default sits above the
  /// floor set by atoms that Zener-tunnel out of the first band and cross
  /// the periodic box (about 2e-4 at depth -3 E_r).
  double edge_fraction = 0.02;
  double edge_tolerance = 1e-3;
  /// Also record the site-to-site coherence by projecting every sample
  /// onto the WS basis (costs one projection per sample).
  bool record_coherence = false;

  /// Throws ConfigError on inconsistent numerics (stability bound,
  /// sampling below 20 points per Bloch period, grid shape).
  void validate() const;
  [[nodiscard]] std::size_t total_steps() const;
};

struct TraceRecord {
  std::vector<double> t;
  std::vector<complex> alpha;
  std::vector<double> n_photons;
  std::vector<double> overlap;  // C
  std::vector<double> centroid;
  std::vector<double> force;
  std::vector<double> depth;  // u0 n
  std::vector<double> norm;
  std::vector<complex> coherence;  // sum c_n^* c_{n+1} / sum |c_n|^2, when recorded
  double sample_dt = 0.0;
  double max_edge_ratio = 0.0;  // largest edge/peak density seen at samples

  [[nodiscard]] std::size_t size() const { return t.size(); }
  void reserve(std::size_t n);
};

/// Superposition of basis states. Delocalized packets use site weights
/// w_n = exp(-2 (n - c)^2 / W^2), so |w_n|^2 falls to 1/e at n - c = +-W/2.
WaveFunction init_wavepacket(const InitialState& initial, const WSBasis& basis);

/// Delta_c - N u0 C[psi].
double effective_detuning(const WaveFunction& psi, const ScaledParams& scaled);

/// Steady state of the cavity equation for the overlap of `psi`.
CavityField steady_field(const WaveFunction& psi, const ScaledParams& scaled);
/// Same for a given overlap C.
CavityField steady_field(double overlap, const ScaledParams& scaled);

/// Mean force of the cavity lattice on the atoms, -<dV/dz> with
/// V = u0 |alpha|^2 cos^2 z, i.e. +u0 |alpha|^2 int |psi|^2 sin(2z) dz.
double lattice_force(const WaveFunction& psi, const CavityField& field, const ScaledParams& scaled);

/// <psi| -d^2/dz^2 + u0 |alpha|^2 cos^2 z - f z |psi>.
double energy(const WaveFunction& psi, const CavityField& field, const ScaledParams& scaled);

struct FieldStep {
  complex mid;
  complex end;
};

/// Advances d alpha/dt = -(kappa - i Delta_f) alpha + eta over one step with
/// Delta_f = Delta_c - N u0 C(t), C interpolated quadratically through its
/// values at the start, midpoint and end. Two RK4 half steps.
FieldStep integrate_field(complex alpha, double c_begin, double c_mid, double c_end,
                          const ScaledParams& scaled, double dt);

/// Strang split-step propagator for the coupled atom-cavity equations.
///
/// Each step applies half a kinetic step, the full potential phase and a
/// second half kinetic step. The atomic density is frozen during the
/// potential stage, so the overlap seen by the field there is exact; the
/// field is advanced with classical RK4 using C at the step ends and the
/// midpoint (the end value extrapolated, then corrected next step), and the
/// lattice phase uses the Simpson integral of |alpha|^2 over the step.
/// Consecutive half kinetic steps are fused, so a step costs two FFTs.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const ScaledParams& scaled, const SpatialGrid& grid, double dt,
                      bool backaction = true);
  ~SplitStepPropagator();
  SplitStepPropagator(SplitStepPropagator&&) noexcept;
  SplitStepPropagator& operator=(SplitStepPropagator&&) noexcept;

  /// Loads the state; the propagator keeps its own copy from here on.
  /// Without backaction Delta_f is frozen with `frozen_overlap`, by default
  /// the overlap of `psi`.
  void reset(const WaveFunction& psi, const CavityField& field,
             std::optional<double> frozen_overlap = std::nullopt);
  /// Advances `steps` steps.
  void advance(std::size_t steps = 1);
  [[nodiscard]] WaveFunction wavefunction() const;
  [[nodiscard]] CavityField field() const;
  [[nodiscard]] double time() const;
  /// Overlap C at the current time.
  [[nodiscard]] double overlap() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One split step; convenient for tests, use SplitStepPropagator for runs.
std::pair<WaveFunction, CavityField> step(const WaveFunction& psi, const CavityField& field,
                                          const ScaledParams& scaled, double dt);

/// Full run from the configured initial state with the field at its
/// steady state. Throws NumericalError on NaN or when density reaches the
/// box edges.
TraceRecord run(const SimConfig& config, const WSBasis& basis);

}  // namespace blochcav
