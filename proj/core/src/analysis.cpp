#include "blochcav/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <spdlog/spdlog.h>

#include "blochcav/errors.hpp"
#include "blochcav/fft.hpp"

namespace blochcav {
namespace {

constexpr double pi = std::numbers::pi;
constexpr complex I{0.0, 1.0};

// Samples per Bloch period; the sample spacing must divide T_B.
std::size_t samples_per_period(double sample_dt, double omega_B) {
  if (!(sample_dt > 0.0) || !(omega_B > 0.0))
    throw ConfigError("analysis: sample spacing and omega_B must be positive");
  const double period = constants::two_pi / omega_B;
  const double ratio = period / sample_dt;
  const auto n = static_cast<std::size_t>(std::llround(ratio));
  if (n < 4 || std::abs(ratio - static_cast<double>(n)) > 1e-6 * ratio)
    throw ConfigError(fmt::format(
        "analysis: sample spacing {} does not divide the Bloch period {} into whole samples", sample_dt,
        period));
  return n;
}

std::size_t first_sample(double discard, double sample_dt) {
  if (discard <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(discard / sample_dt - 1e-9));
}

}  // namespace

double bessel_j(int n, double x) {
  double sign = 1.0;
  if (n < 0) {
    n = -n;
    if (n % 2 != 0) sign = -sign;
  }
  if (x < 0.0) {
    x = -x;
    if (n % 2 != 0) sign = -sign;
  }
  return sign * std::cyl_bessel_j(static_cast<double>(n), x);
}

std::size_t Spectrum::bin_of(double w) const {
  if (frequencies.empty()) throw ConfigError("spectrum is empty");
  const double k = std::round((w - frequencies.front()) / bin_width);
  const double last = static_cast<double>(frequencies.size() - 1);
  return static_cast<std::size_t>(std::clamp(k, 0.0, last));
}

Spectrum psd(std::span<const complex> series, double dt, double resolution) {
  if (!(dt > 0.0) || !(resolution > 0.0)) throw ConfigError("psd: dt and resolution must be positive");
  const auto m = static_cast<std::size_t>(std::llround(constants::two_pi / (resolution * dt)));
  if (m < 2 || series.size() < m)
    throw ConfigError(fmt::format("psd: resolution needs {} samples, series has {}", m, series.size()));

  FftWorkspace fft(m);
  auto buf = fft.data();
  std::copy(series.end() - static_cast<std::ptrdiff_t>(m), series.end(), buf.begin());
  double power = 0.0;
  for (const auto& v : buf) power += std::norm(v);
  fft.forward();

  Spectrum s;
  s.bin_width = constants::two_pi / (static_cast<double>(m) * dt);
  s.mean_power = power / static_cast<double>(m);
  s.frequencies.resize(m);
  s.psd.resize(m);
  // Bin j of the forward transform holds the exp(+i w_j t) component, which
  // sits at -w_j in the physical convention. Output index i <-> -w.
  const long half = static_cast<long>(m / 2);
  const double norm = 1.0 / (static_cast<double>(m) * static_cast<double>(m) * s.bin_width);
  for (std::size_t j = 0; j < m; ++j) {
    const long signed_j = static_cast<long>(j) <= half ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(m);
    const long phys = -signed_j;
    const auto i = static_cast<std::size_t>(phys + half);
    s.frequencies[i] = static_cast<double>(phys) * s.bin_width;
    s.psd[i] = std::norm(buf[j]) * norm;
  }
  return s;
}

SidebandPowers sideband_powers(const Spectrum& spectrum, double omega_B) {
  if (spectrum.frequencies.empty()) throw ConfigError("sideband_powers: empty spectrum");
  if (omega_B < 3.0 * spectrum.bin_width || omega_B + 2.0 * spectrum.bin_width > spectrum.frequencies.back())
    throw ConfigError("sideband_powers: spectrum does not resolve omega_B");
  const auto window = [&](double w) {
    const auto k = static_cast<long>(spectrum.bin_of(w));
    double p = 0.0;
    for (long i = k - 2; i <= k + 2; ++i) p += spectrum.psd[static_cast<std::size_t>(i)];
    return p * spectrum.bin_width;
  };
  SidebandPowers out;
  out.plus = window(omega_B);
  out.minus = window(-omega_B);
  std::vector<double> sorted = spectrum.psd;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  out.noise_floor = sorted[sorted.size() / 2] * spectrum.bin_width;
  out.resolved = out.plus > 10.0 * out.noise_floor && out.minus > 10.0 * out.noise_floor;
  if (!out.resolved)
    spdlog::warn("sideband_powers: sidebands ({:.3g}, {:.3g}) are within 10x of the noise floor {:.3g}",
                 out.plus, out.minus, out.noise_floor);
  return out;
}

double dominant_frequency(std::span<const double> series, double dt) {
  if (series.size() < 4 || !(dt > 0.0)) throw ConfigError("dominant_frequency: need at least 4 samples");
  const std::size_t m = series.size();
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(m);
  FftWorkspace fft(m);
  auto buf = fft.data();
  for (std::size_t j = 0; j < m; ++j) buf[j] = series[j] - mean;
  fft.forward();
  std::size_t best = 1;
  for (std::size_t j = 2; j <= m / 2; ++j)
    if (std::norm(buf[j]) > std::norm(buf[best])) best = j;
  return static_cast<double>(best) * constants::two_pi / (static_cast<double>(m) * dt);
}

double periodic_amplitude(std::span<const double> series, double sample_dt, double omega_B, double discard) {
  const std::size_t per = samples_per_period(sample_dt, omega_B);
  const std::size_t start = first_sample(discard, sample_dt);
  const std::size_t periods = start < series.size() ? (series.size() - start) / per : 0;
  double sum = 0.0;
  for (std::size_t p = 0; p < periods; ++p) {
    const auto window = series.subspan(start + p * per, per);
    const auto [lo, hi] = std::ranges::minmax(window);
    sum += 0.5 * (hi - lo);
  }
  return periods > 0 ? sum / static_cast<double>(periods) : 0.0;
}

VelocityFit numeric_transport_velocity(std::span<const double> centroid, double sample_dt, double omega_B,
                                       double discard) {
  const std::size_t per = samples_per_period(sample_dt, omega_B);
  const std::size_t start = first_sample(discard, sample_dt);
  const std::size_t periods = start < centroid.size() ? (centroid.size() - start) / per : 0;
  if (periods < 5)
    throw ConfigError(fmt::format("transport velocity: need at least 5 whole periods, trace has {}", periods));

  std::vector<double> avg(periods, 0.0);
  for (std::size_t p = 0; p < periods; ++p) {
    const auto first = centroid.begin() + static_cast<std::ptrdiff_t>(start + p * per);
    double s = 0.0;
    for (auto it = first; it != first + static_cast<std::ptrdiff_t>(per); ++it) s += *it;
    avg[p] = s / static_cast<double>(per) / pi;
  }
  const double n = static_cast<double>(periods);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t p = 0; p < periods; ++p) {
    const double x = static_cast<double>(p);
    sx += x;
    sy += avg[p];
    sxx += x * x;
    sxy += x * avg[p];
  }
  VelocityFit fit;
  fit.periods = periods;
  fit.sites_per_period = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - fit.sites_per_period * sx) / n;
  double r2 = 0.0;
  for (std::size_t p = 0; p < periods; ++p) {
    const double r = avg[p] - intercept - fit.sites_per_period * static_cast<double>(p);
    r2 += r * r;
  }
  fit.residual = std::sqrt(r2 / n);
  fit.steady = fit.residual <= std::max(0.2 * std::abs(fit.sites_per_period), 1e-3);
  if (!fit.steady)
    spdlog::warn("transport velocity: fit residual {:.3g} sites exceeds 20% of the slope {:.3g}", fit.residual,
                 fit.sites_per_period);
  return fit;
}

AnalyticVelocity analytic_transport_velocity(const ScaledParams& scaled, const MatrixElements& elements,
                                             double sigma1, double s0, double delta0, bool strict) {
  const double w = scaled.omega_B;
  const double k = scaled.kappa;
  if (!(w > 0.0) || !(k > 0.0)) throw ConfigError("analytic velocity: omega_B and kappa must be positive");

  AnalyticVelocity v;
  v.u1 = 2.0 * scaled.n_atoms * scaled.u0 * elements.gamma1 * sigma1;
  v.delta_plus = delta0 - w;
  v.delta_minus = delta0 + w;
  v.in_regime = std::abs(v.u1) / w < 1.0;
  if (!v.in_regime) {
    const auto msg = fmt::format("analytic velocity: |u1|/omega_B = {:.3g} is outside the regime < 1",
                                 std::abs(v.u1) / w);
    if (strict) throw RegimeError(msg);
    spdlog::warn(msg);
  }

  const double x = v.u1 / w;
  const double common = s0 * elements.gamma1 * sigma1 * bessel_j(0, x) * bessel_j(1, x);
  const double lp = 1.0 / (k * k + v.delta_plus * v.delta_plus);
  const double lm = 1.0 / (k * k + v.delta_minus * v.delta_minus);
  v.sideband_form = common * 2.0 * k * (lp - lm);
  v.printed = common * 8.0 * k * w * delta0 * lp * lm;
  // The identity is checked against the size of the individual sideband
  // terms, which is what cancels when delta0 -> 0.
  const double scale = std::abs(common) * 2.0 * k * std::max(lp, lm);
  if (std::abs(v.sideband_form - v.printed) > 1e-12 * scale)
    throw NumericalError(fmt::format("analytic velocity: sideband and detuning forms differ ({} vs {})",
                                     v.sideband_form, v.printed));
  v.sites_per_period = constants::two_pi * v.printed;
  return v;
}

complex jacobi_anger_field(const ScaledParams& scaled, double delta0, double u1, double theta1, complex alpha0,
                           double t) {
  const double w = scaled.omega_B;
  const double x = u1 / w;
  int n_max = 1;
  while (n_max < 1000 && (n_max <= std::abs(x) || std::abs(bessel_j(n_max, x)) >= 1e-10)) ++n_max;
  const double phase = w * t + theta1;
  complex sum{};
  for (int n = -n_max; n <= n_max; ++n) {
    if (n == 0) continue;
    const double delta_n = delta0 - n * w;
    sum += I * static_cast<double>(n) * w * bessel_j(n, x) * std::polar(1.0, n * phase) /
           complex(scaled.kappa, -delta_n);
  }
  return -alpha0 * std::polar(1.0, -x * std::sin(phase)) * sum;
}

double mean_fluctuation_power(const ScaledParams& scaled, double delta0, double u1, complex alpha0) {
  const double w = scaled.omega_B;
  const double k = scaled.kappa;
  const double j1 = bessel_j(1, u1 / w);
  const double dp = delta0 - w;
  const double dm = delta0 + w;
  return std::norm(alpha0) * j1 * j1 * w * w * (1.0 / (k * k + dp * dp) + 1.0 / (k * k + dm * dm));
}

LoopWork loop_work(std::span<const double> centroid, std::span<const double> force, double sample_dt,
                   double omega_B, double discard) {
  if (centroid.size() != force.size()) throw ConfigError("loop_work: centroid and force lengths differ");
  const std::size_t per = samples_per_period(sample_dt, omega_B);
  const std::size_t start = first_sample(discard, sample_dt);
  const std::size_t periods = start < centroid.size() ? (centroid.size() - 1 - start) / per : 0;
  if (periods < 1) throw ConfigError("loop_work: need at least one whole period");

  LoopWork out;
  double worst_gap = 0.0;
  double area_sum = 0.0;
  for (std::size_t p = 0; p < periods; ++p) {
    const std::size_t i0 = start + p * per;
    // per + 1 points span exactly one period. The work is the line integral
    // along the path; the shoelace area of the polygon closed by the chord
    // back to the first point fixes the orientation.
    double work = 0.0;
    double area = 0.0;
    double zmin = centroid[i0], zmax = centroid[i0];
    double fmin = force[i0], fmax = force[i0];
    for (std::size_t i = i0; i <= i0 + per; ++i) {
      const std::size_t j = i == i0 + per ? i0 : i + 1;
      area += centroid[i] * force[j] - centroid[j] * force[i];
      if (i < i0 + per) work += 0.5 * (force[i] + force[j]) * (centroid[j] - centroid[i]);
      zmin = std::min(zmin, centroid[i]);
      zmax = std::max(zmax, centroid[i]);
      fmin = std::min(fmin, force[i]);
      fmax = std::max(fmax, force[i]);
    }
    out.loops.push_back(work);
    area_sum += 0.5 * area;
    const double gz = zmax > zmin ? std::abs(centroid[i0 + per] - centroid[i0]) / (zmax - zmin) : 0.0;
    const double gf = fmax > fmin ? std::abs(force[i0 + per] - force[i0]) / (fmax - fmin) : 0.0;
    worst_gap = std::max({worst_gap, gz, gf});
  }
  double sum = 0.0;
  for (double l : out.loops) sum += l;
  out.per_period = sum / static_cast<double>(periods);
  out.clockwise = area_sum < 0.0;
  out.closed = worst_gap <= 0.05;
  if (!out.closed)
    spdlog::warn("loop_work: loops are open by up to {:.1f}% of their extent", 100.0 * worst_gap);
  return out;
}

RefractiveEstimate refractive_estimate(const PhysicalParams& physical, double volume_ratio) {
  const double omega_L = physical.laser_frequency();
  const double omega_c = omega_L - physical.cavity_detuning;
  if (!(omega_c > 0.0)) throw ConfigError("refractive_estimate: cavity frequency must be positive");
  RefractiveEstimate r;
  r.chi_prime = -volume_ratio * physical.atom_number * physical.atom_light_shift / omega_c;
  r.wavelength_shift_fraction = 2.0 * physical.cavity_decay / omega_L;
  return r;
}

MetrologyEstimate coherence_time(const PhysicalParams& physical, double mean_photons, double mean_delta_f,
                                 std::optional<double> cooperativity) {
  const double delta_a = physical.atom_detuning;
  const double gamma = physical.atomic_linewidth;
  const double kappa = physical.cavity_decay;
  if (delta_a == 0.0) throw ConfigError("coherence_time: atom detuning must be nonzero");
  if (!(gamma > 0.0) || !(kappa > 0.0)) throw ConfigError("coherence_time: gamma and kappa must be positive");
  if (mean_photons < 0.0) throw ConfigError("coherence_time: photon number must be non-negative");

  const double omega0_sq = physical.atom_light_shift * delta_a;
  if (omega0_sq < 0.0)
    throw ConfigError("coherence_time: U0 and Delta_a must have the same sign (U0 = Omega0^2 / Delta_a)");

  MetrologyEstimate m;
  m.cooperativity = cooperativity.value_or(omega0_sq / (2.0 * kappa * gamma));
  const double rate = 2.0 * gamma * mean_photons * omega0_sq / (delta_a * delta_a);
  m.tau_sp = rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
  const double lorentz = kappa * kappa / (kappa * kappa + mean_delta_f * mean_delta_f);
  m.coherence_time = m.tau_sp / (1.0 + 2.0 * m.cooperativity * 0.5 * lorentz);
  const auto r = refractive_estimate(physical);
  m.chi_prime = r.chi_prime;
  m.wavelength_shift_fraction = r.wavelength_shift_fraction;
  return m;
}

}  // namespace blochcav
