#pragma once

#include <cstddef>
#include <vector>

#include "blochcav/grid.hpp"

namespace blochcav {

/// Overlaps of cos^2(z) and z between first-band Wannier-Stark states:
///   gamma0 = <phi_n|cos^2|phi_n>,   gamma1 = <phi_n|cos^2|phi_{n+1}>,
///   Z0     = <phi_0|z|phi_0>,        Z1     = <phi_n|z|phi_{n+1}>.
/// Z0 is the absolute centroid of the site-0 state; site n sits at Z0 + n pi.
struct MatrixElements {
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double Z0 = 0.0;
  double Z1 = 0.0;
};

/// One first-band eigenstate from a direct diagonalization.
struct BoxState {
  long site = 0;
  double energy = 0.0;
  double centroid = 0.0;
  bool usable = false;         // at least edge_margin sites from either wall
  std::vector<double> values;  // real, normalized: sum |phi|^2 dz = 1
};

/// First band of the tilted lattice on a hard-wall box, sorted by site.
struct BoxSpectrum {
  SpatialGrid grid;
  std::vector<BoxState> states;
  double omega_B = 0.0;
  double s0 = 0.0;

  /// max |E_{n+1} - E_n - omega_B| / omega_B over usable neighbours.
  [[nodiscard]] double max_spacing_error() const;
  /// max L2 distance between phi_{n+1}(z) and phi_n(z - pi), usable pairs,
  /// after aligning the arbitrary eigenvector signs.
  [[nodiscard]] double max_translation_error() const;
};

struct WSOptions {
  /// Sites of the compact diagonalization box.
  std::size_t box_sites = 48;
  /// States closer than this to a wall are flagged unusable.
  std::size_t edge_margin = 14;
};

/// First band of -d^2/dz^2 + s0 cos^2(z) + omega_B z / pi on `box`, with
/// hard walls at z_min and z_max and a sine-spectral kinetic operator.
///
/// The untilted lattice is diagonalized first and the tilt is diagonalized
/// inside its lowest band. Full-box eigenstates would otherwise mix
/// resonantly with higher-band states many sites away (finite-box Zener
/// resonances), spoiling the translation property at the 1e-4 level.
/// Throws NumericalError when the band cannot be identified unambiguously
/// (no gap, or interior spacings off by more than 5%).
BoxSpectrum diagonalize_box(double s0, double omega_B, const SpatialGrid& box,
                            std::size_t edge_margin = 14);

/// First-band Wannier-Stark basis sampled on a simulation grid.
///
/// States are real. The centre state is positive at its centroid and the
/// remaining states follow from phi_{n+m}(z) = phi_n(z - m pi) with an extra
/// (-1)^n when needed to make gamma1 non-negative. Energies are e0 + n
/// omega_B; e0 is reported but treated as zero everywhere else.
struct WSBasis {
  SpatialGrid grid;
  std::vector<std::vector<double>> states;
  std::vector<long> site_indices;
  std::vector<bool> usable;
  double e0 = 0.0;
  double s0 = 0.0;
  double omega_B = 0.0;
  MatrixElements elements;
  /// Diagnostics of the raw diagonalization the basis was built from.
  double spacing_error = 0.0;
  double translation_error = 0.0;

  [[nodiscard]] std::size_t size() const { return states.size(); }
  /// Position in `states` of the given site, or -1.
  [[nodiscard]] long slot_of(long site) const;
  [[nodiscard]] const std::vector<double>& state(long site) const;
  [[nodiscard]] double energy(long site) const {
    return static_cast<double>(site) * omega_B;
  }
};

/// Builds `n_sites` first-band states centred on site 0 of `grid`.
///
/// Requires |s0| >= 1, omega_B > 0 and at least 16 grid points per lattice
/// period. The eigenproblem is solved on a compact box with the same spacing
/// (WSOptions::box_sites) and the interior centre state is translated onto
/// `grid`.
WSBasis compute_ws_basis(double s0, double omega_B, const SpatialGrid& grid,
                         std::size_t n_sites, const WSOptions& options = {});

/// Matrix elements of the basis, evaluated directly on its grid between the
/// states of sites 0 and 1.
MatrixElements matrix_elements(const WSBasis& basis);

/// Same, between sites n and n+1 (for checking n-independence).
MatrixElements matrix_elements_at(const WSBasis& basis, long site);

struct Projection {
  long first_site = 0;
  std::vector<complex> coefficients;  // c_n for consecutive sites
  double residual = 0.0;              // 1 - sum |c_n|^2 (unit-norm psi)

  /// |sum_n c_n^* c_{n+1}| / sum |c_n|^2
  [[nodiscard]] double sigma1() const;
  /// arg(sum_n c_n^* c_{n+1})
  [[nodiscard]] double theta1() const;
};

/// c_n = integral phi_n(z) psi(z) dz. Logs a warning when more than 1e-3 of
/// the norm lies outside the span of the basis.
Projection project_onto_ws(const WaveFunction& psi, const WSBasis& basis);

/// Sum_n c_n phi_n on the basis grid.
WaveFunction reconstruct(const Projection& projection, const WSBasis& basis);

}  // namespace blochcav
