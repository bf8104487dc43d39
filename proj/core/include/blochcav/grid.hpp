#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace blochcav {

using complex = std::complex<double>;

/// Uniform grid z_j = z_min + j dz, j = 0..n_points-1, in units of 1/k_r.
///
/// Grids built by lattice() place z = 0 on a grid point and span an integer
/// number of lattice periods (pi) with an integer number of points per
/// period, so that translation by one lattice site is an exact index shift.
struct SpatialGrid {
  std::size_t n_points = 0;
  double z_min = 0.0;
  double dz = 0.0;

  [[nodiscard]] double z_max() const { return z_min + static_cast<double>(n_points) * dz; }
  [[nodiscard]] double length() const { return static_cast<double>(n_points) * dz; }
  [[nodiscard]] double z(std::size_t j) const { return z_min + static_cast<double>(j) * dz; }
  [[nodiscard]] std::size_t points_per_period() const;
  [[nodiscard]] std::size_t n_sites() const;
  /// Largest |k| representable on the grid, pi / dz.
  [[nodiscard]] double k_max() const { return std::numbers::pi / dz; }
  /// Grid index of the lattice point z = site * pi.
  [[nodiscard]] long index_of_site(long site) const;

  /// Centred grid of `n_sites` lattice periods, z in [-n_sites pi/2, n_sites pi/2).
  static SpatialGrid lattice(std::size_t n_sites, std::size_t points_per_period);

  /// Throws ConfigError unless the grid spans whole periods with whole
  /// points per period. `require_pow2` additionally checks n_points.
  void validate(bool require_pow2 = true) const;

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;
};

/// Complex atomic amplitude psi(z) sampled on a grid.
struct WaveFunction {
  SpatialGrid grid;
  std::vector<complex> values;
  double time = 0.0;

  [[nodiscard]] double norm() const;  // integral of |psi|^2
  [[nodiscard]] double centroid() const;
  void normalize();
};

/// Integral of |psi|^2 cos^2(z): the overlap C between atoms and cavity mode.
double overlap_c(const WaveFunction& psi);

}  // namespace blochcav
