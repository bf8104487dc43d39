#include "blochcav/wannier_stark.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "blochcav/errors.hpp"

namespace blochcav {

namespace {

constexpr double pi = std::numbers::pi;

double site_offset(double s0) { return s0 < 0.0 ? 0.0 : 0.5 * pi; }

double inner(const std::vector<double>& a, const std::vector<double>& b, double dz) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s * dz;
}

template <class Weight>
double weighted(const std::vector<double>& a, const std::vector<double>& b,
                const SpatialGrid& grid, Weight&& w) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j] * w(grid.z(j));
  return s * grid.dz;
}

double cos2(double z) {
  const double c = std::cos(z);
  return c * c;
}

/// phi(z - shift_sites * pi) sampled on the same grid, zero outside.
std::vector<double> shifted(const std::vector<double>& phi, long shift_points) {
  std::vector<double> out(phi.size(), 0.0);
  const long n = static_cast<long>(phi.size());
  for (long j = 0; j < n; ++j) {
    const long src = j - shift_points;
    if (src >= 0 && src < n) out[static_cast<std::size_t>(j)] = phi[static_cast<std::size_t>(src)];
  }
  return out;
}

}  // namespace

double BoxSpectrum::max_spacing_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    if (!states[i].usable || !states[i + 1].usable) continue;
    const double gap = states[i + 1].energy - states[i].energy;
    worst = std::max(worst, std::abs(gap - omega_B) / omega_B);
  }
  return worst;
}

double BoxSpectrum::max_translation_error() const {
  const long ppp = static_cast<long>(grid.points_per_period());
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    const auto& a = states[i];
    const auto& b = states[i + 1];
    if (!a.usable || !b.usable || b.site != a.site + 1) continue;
    const auto moved = shifted(a.values, ppp);
    const double sign = inner(moved, b.values, grid.dz) < 0.0 ? -1.0 : 1.0;
    double err = 0.0;
    for (std::size_t j = 0; j < moved.size(); ++j) {
      const double d = b.values[j] - sign * moved[j];
      err += d * d;
    }
    worst = std::max(worst, std::sqrt(err * grid.dz));
  }
  return worst;
}

BoxSpectrum diagonalize_box(double s0, double omega_B, const SpatialGrid& box,
                            std::size_t edge_margin) {
  if (s0 == 0.0) throw ConfigError("wannier_stark: lattice depth s0 = 0 has no band structure");
  if (!(omega_B > 0.0)) throw ConfigError("wannier_stark: omega_B must be positive (f = 0 has no ladder)");
  box.validate(false);

  // Unknowns at the interior points j = 1..n-1; psi vanishes at both walls.
  const std::size_t n = box.n_points;
  const Eigen::Index m = static_cast<Eigen::Index>(n - 1);
  const double L = box.length();

  Eigen::MatrixXd sine(m, m);
  const double norm = std::sqrt(2.0 / static_cast<double>(n));
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index k = 0; k < m; ++k)
      sine(j, k) = norm * std::sin(pi * static_cast<double>((j + 1) * (k + 1)) / static_cast<double>(n));

  Eigen::VectorXd k2(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double kk = pi * static_cast<double>(k + 1) / L;
    k2(k) = kk * kk;
  }
  Eigen::VectorXd zs(m);
  for (Eigen::Index j = 0; j < m; ++j) zs(j) = box.z(static_cast<std::size_t>(j + 1));

  // Untilted lattice first: its lowest band spans the single-band subspace.
  Eigen::MatrixXd h0 = sine * k2.asDiagonal() * sine;
  for (Eigen::Index j = 0; j < m; ++j) h0(j, j) += s0 * cos2(zs(j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> untilted(h0);
  if (untilted.info() != Eigen::Success) throw NumericalError("wannier_stark: eigensolver failed");
  const Eigen::VectorXd& e_band = untilted.eigenvalues();

  // Band size: the box holds box_sites wells (box_sites - 1 when the walls
  // sit on well centres); the gap to band 2 is the largest jump nearby.
  const Eigen::Index sites = static_cast<Eigen::Index>(box.n_sites());
  Eigen::Index band = 0;
  double jump = 0.0;
  for (Eigen::Index cand = std::max<Eigen::Index>(1, sites - 2); cand <= std::min(sites + 1, m - 1); ++cand) {
    const double d = e_band(cand) - e_band(cand - 1);
    if (d > jump) {
      jump = d;
      band = cand;
    }
  }
  const double typical = (e_band(band - 1) - e_band(0)) / static_cast<double>(std::max<Eigen::Index>(1, band - 1));
  if (band < 2 || jump < 5.0 * typical)
    throw NumericalError("wannier_stark: first band not separated by a gap; lattice too shallow");

  // Tilt restricted to the first band.
  const Eigen::MatrixXd q = untilted.eigenvectors().leftCols(band);
  const double tilt = omega_B / pi;  // -f
  Eigen::MatrixXd hp = tilt * (q.transpose() * zs.asDiagonal() * q);
  hp.diagonal() += e_band.head(band);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tilted(hp);
  if (tilted.info() != Eigen::Success) throw NumericalError("wannier_stark: eigensolver failed");
  const Eigen::MatrixXd& a = tilted.eigenvectors();

  // First-order interband polarization by the tilt, with untilted energy
  // denominators: e_b - e_k >= the band gap, so no resonances enter.
  const Eigen::Index others = m - band;
  const Eigen::MatrixXd qz = untilted.eigenvectors().rightCols(others).transpose() * (zs.asDiagonal() * q);
  Eigen::MatrixXd ratio(others, band);
  for (Eigen::Index b = 0; b < band; ++b)
    for (Eigen::Index k = 0; k < others; ++k)
      ratio(k, b) = tilt * qz(k, b) / (e_band(b) - e_band(band + k));
  Eigen::MatrixXd vectors = q * a + untilted.eigenvectors().rightCols(others) * (ratio * a);

  // Symmetric (Loewdin) orthonormalization keeps the set translation covariant.
  {
    const Eigen::MatrixXd overlap = vectors.transpose() * vectors;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> so(overlap);
    const Eigen::MatrixXd inv_sqrt =
        so.eigenvectors() * so.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * so.eigenvectors().transpose();
    vectors = vectors * inv_sqrt;
  }
  const Eigen::VectorXd& energies = tilted.eigenvalues();

  const double offset = site_offset(s0);
  const double wall_lo = box.z_min;
  const double wall_hi = box.z_max();
  const double margin = static_cast<double>(edge_margin) * pi;
  const double amp_scale = 1.0 / std::sqrt(box.dz);

  std::map<long, BoxState> by_site;
  for (Eigen::Index c = 0; c < band; ++c) {
    BoxState st;
    st.centroid = (vectors.col(c).array().square() * zs.array()).sum();
    st.site = std::lround((st.centroid - offset) / pi);
    st.energy = energies(c);
    const double site_z = static_cast<double>(st.site) * pi + offset;
    st.usable = site_z - wall_lo >= margin && wall_hi - site_z >= margin;
    st.values.assign(n, 0.0);
    for (Eigen::Index j = 0; j < m; ++j)
      st.values[static_cast<std::size_t>(j + 1)] = vectors(j, c) * amp_scale;
    auto [it, inserted] = by_site.emplace(st.site, std::move(st));
    if (!inserted && (it->second.usable || st.usable))
      throw NumericalError("wannier_stark: two first-band states on site " +
                           std::to_string(it->first) + "; band identification ambiguous");
  }

  BoxSpectrum out;
  out.grid = box;
  out.omega_B = omega_B;
  out.s0 = s0;
  for (auto& [site, st] : by_site) out.states.push_back(std::move(st));

  for (std::size_t i = 0; i + 1 < out.states.size(); ++i) {
    const auto& a = out.states[i];
    const auto& b = out.states[i + 1];
    if (!a.usable || !b.usable) continue;
    if (b.site != a.site + 1 || std::abs(b.energy - a.energy - omega_B) > 0.05 * omega_B)
      throw NumericalError("wannier_stark: interior level spacing deviates from omega_B by more "
                           "than 5%; lattice too shallow or box too small");
  }
  return out;
}

long WSBasis::slot_of(long site) const {
  if (site_indices.empty()) return -1;
  const long slot = site - site_indices.front();
  if (slot < 0 || slot >= static_cast<long>(site_indices.size())) return -1;
  return slot;
}

const std::vector<double>& WSBasis::state(long site) const {
  const long slot = slot_of(site);
  if (slot < 0) throw std::out_of_range("WSBasis: site " + std::to_string(site) + " not in basis");
  return states[static_cast<std::size_t>(slot)];
}

WSBasis compute_ws_basis(double s0, double omega_B, const SpatialGrid& grid, std::size_t n_sites,
                         const WSOptions& options) {
  if (s0 == 0.0) throw ConfigError("wannier_stark: lattice depth s0 = 0 is degenerate");
  if (std::abs(s0) < 1.0)
    throw ConfigError("wannier_stark: |s0| must be at least 1 E_r for localized states");
  if (!(omega_B > 0.0)) throw ConfigError("wannier_stark: omega_B must be positive");
  grid.validate(false);
  const std::size_t ppp = grid.points_per_period();
  if (ppp < 16) throw ConfigError("wannier_stark: need at least 16 grid points per lattice period");
  if (n_sites == 0 || n_sites > grid.n_sites())
    throw ConfigError("wannier_stark: n_sites must be between 1 and the number of grid sites");
  if (options.box_sites < 2 * options.edge_margin + 2)
    throw ConfigError("wannier_stark: basis box must exceed twice the edge margin");

  const SpatialGrid box = SpatialGrid::lattice(options.box_sites, ppp);
  BoxSpectrum spectrum = diagonalize_box(s0, omega_B, box, options.edge_margin);

  const auto centre = std::find_if(spectrum.states.begin(), spectrum.states.end(),
                                   [](const BoxState& s) { return s.site == 0; });
  if (centre == spectrum.states.end() || !centre->usable)
    throw NumericalError("wannier_stark: no usable state on the centre site");

  std::vector<double> reference = centre->values;
  {
    const long at = std::lround((centre->centroid - box.z_min) / box.dz);
    if (reference[static_cast<std::size_t>(std::clamp(at, 0L, static_cast<long>(reference.size()) - 1))] < 0.0)
      for (auto& v : reference) v = -v;
  }

  // gamma1 sign from the reference and its one-site translate, inside the box.
  const long ppp_l = static_cast<long>(ppp);
  const double raw_gamma1 = weighted(reference, shifted(reference, ppp_l), box, cos2);
  const bool alternate = raw_gamma1 < 0.0;

  WSBasis basis;
  basis.grid = grid;
  basis.s0 = s0;
  basis.omega_B = omega_B;
  basis.e0 = centre->energy;
  basis.spacing_error = spectrum.max_spacing_error();
  basis.translation_error = spectrum.max_translation_error();

  // Site 0 of `grid` is z = 0; translate the box reference accordingly.
  const long first = -static_cast<long>(n_sites / 2);
  const long box_origin = box.index_of_site(0);
  const long grid_origin = grid.index_of_site(0);
  const double margin = static_cast<double>(options.edge_margin) * pi;
  const double offset = site_offset(s0);
  for (std::size_t i = 0; i < n_sites; ++i) {
    const long site = first + static_cast<long>(i);
    std::vector<double> phi(grid.n_points, 0.0);
    const double sign = (alternate && (site % 2 != 0)) ? -1.0 : 1.0;
    for (std::size_t j = 0; j < grid.n_points; ++j) {
      const long src = static_cast<long>(j) - grid_origin - site * ppp_l + box_origin;
      if (src >= 0 && src < static_cast<long>(box.n_points))
        phi[j] = sign * reference[static_cast<std::size_t>(src)];
    }
    const double site_z = static_cast<double>(site) * pi + offset;
    basis.usable.push_back(site_z - grid.z_min >= margin && grid.z_max() - site_z >= margin);
    basis.states.push_back(std::move(phi));
    basis.site_indices.push_back(site);
  }

  if (basis.slot_of(0) < 0 || basis.slot_of(1) < 0)
    throw ConfigError("wannier_stark: basis must contain sites 0 and 1");
  basis.elements = matrix_elements(basis);
  return basis;
}

MatrixElements matrix_elements_at(const WSBasis& basis, long site) {
  const auto& a = basis.state(site);
  const auto& b = basis.state(site + 1);
  const auto& g = basis.grid;
  MatrixElements me;
  me.gamma0 = weighted(a, a, g, cos2);
  me.gamma1 = weighted(a, b, g, cos2);
  me.Z0 = weighted(a, a, g, [](double z) { return z; }) - static_cast<double>(site) * pi;
  me.Z1 = weighted(a, b, g, [](double z) { return z; });
  return me;
}

MatrixElements matrix_elements(const WSBasis& basis) { return matrix_elements_at(basis, 0); }

double Projection::sigma1() const {
  complex b{0.0, 0.0};
  double total = 0.0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    total += std::norm(coefficients[i]);
    if (i + 1 < coefficients.size()) b += std::conj(coefficients[i]) * coefficients[i + 1];
  }
  return total > 0.0 ? std::abs(b) / total : 0.0;
}

double Projection::theta1() const {
  complex b{0.0, 0.0};
  for (std::size_t i = 0; i + 1 < coefficients.size(); ++i)
    b += std::conj(coefficients[i]) * coefficients[i + 1];
  return std::arg(b);
}

Projection project_onto_ws(const WaveFunction& psi, const WSBasis& basis) {
  if (!(psi.grid == basis.grid)) throw ConfigError("project_onto_ws: wave function and basis grids differ");
  Projection p;
  p.first_site = basis.site_indices.front();
  p.coefficients.reserve(basis.size());
  double captured = 0.0;
  for (const auto& phi : basis.states) {
    complex c{0.0, 0.0};
    for (std::size_t j = 0; j < phi.size(); ++j) c += phi[j] * psi.values[j];
    c *= basis.grid.dz;
    captured += std::norm(c);
    p.coefficients.push_back(c);
  }
  p.residual = psi.norm() - captured;
  if (p.residual > 1e-3)
    spdlog::warn("project_onto_ws: {:.3e} of the norm lies outside the first-band basis", p.residual);
  return p;
}

WaveFunction reconstruct(const Projection& projection, const WSBasis& basis) {
  WaveFunction psi;
  psi.grid = basis.grid;
  psi.values.assign(basis.grid.n_points, complex{0.0, 0.0});
  for (std::size_t i = 0; i < projection.coefficients.size(); ++i) {
    const long site = projection.first_site + static_cast<long>(i);
    const auto& phi = basis.state(site);
    for (std::size_t j = 0; j < phi.size(); ++j) psi.values[j] += projection.coefficients[i] * phi[j];
  }
  return psi;
}

}  // namespace blochcav
