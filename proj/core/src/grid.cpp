#include "blochcav/grid.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "blochcav/errors.hpp"

namespace blochcav {

std::size_t SpatialGrid::points_per_period() const {
  return static_cast<std::size_t>(std::lround(std::numbers::pi / dz));
}

std::size_t SpatialGrid::n_sites() const {
  return static_cast<std::size_t>(std::lround(length() / std::numbers::pi));
}

long SpatialGrid::index_of_site(long site) const {
  return std::lround((static_cast<double>(site) * std::numbers::pi - z_min) / dz);
}

SpatialGrid SpatialGrid::lattice(std::size_t n_sites, std::size_t points_per_period) {
  if (n_sites == 0 || points_per_period == 0)
    throw ConfigError("grid: n_sites and points_per_period must be positive");
  SpatialGrid g;
  g.n_points = n_sites * points_per_period;
  g.dz = std::numbers::pi / static_cast<double>(points_per_period);
  g.z_min = -static_cast<double>(n_sites / 2) * std::numbers::pi;
  return g;
}

void SpatialGrid::validate(bool require_pow2) const {
  if (n_points < 2 || !(dz > 0.0)) throw ConfigError("grid: empty or non-positive spacing");
  if (require_pow2 && !std::has_single_bit(n_points))
    throw ConfigError("grid: n_points must be a power of two, got " + std::to_string(n_points));
  const double ppp = std::numbers::pi / dz;
  if (std::abs(ppp - std::round(ppp)) > 1e-9 * ppp)
    throw ConfigError("grid: lattice period must hold an integer number of points");
  if (n_points % points_per_period() != 0)
    throw ConfigError("grid: box must span an integer number of lattice periods");
  const double offset = z_min / std::numbers::pi;
  if (std::abs(offset - std::round(offset)) > 1e-9 * std::max(1.0, std::abs(offset)))
    throw ConfigError("grid: z_min must be a multiple of the lattice period");
}

double WaveFunction::norm() const {
  double s = 0.0;
  for (const auto& v : values) s += std::norm(v);
  return s * grid.dz;
}

double WaveFunction::centroid() const {
  double s = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) s += grid.z(j) * std::norm(values[j]);
  return s * grid.dz;
}

void WaveFunction::normalize() {
  const double n = norm();
  if (!(n > 0.0)) throw NumericalError("cannot normalize a vanishing wave function");
  const double scale = 1.0 / std::sqrt(n);
  for (auto& v : values) v *= scale;
}

double overlap_c(const WaveFunction& psi) {
  double s = 0.0;
  for (std::size_t j = 0; j < psi.values.size(); ++j) {
    const double c = std::cos(psi.grid.z(j));
    s += c * c * std::norm(psi.values[j]);
  }
  return s * psi.grid.dz;
}

}  // namespace blochcav
