#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "blochcav/grid.hpp"
#include "blochcav/units.hpp"
#include "blochcav/wannier_stark.hpp"

namespace blochcav {

/// Integer-order Bessel function J_n(x) for any sign of n and x.
double bessel_j(int n, double x);

/// Two-sided periodogram of a complex series.
///
/// Frequencies are angular, in the units of 1/dt, and follow the physical
/// convention for a field in the frame of the pump: a component
/// exp(-i w t) appears at +w, i.e. w > 0 lies above the pump frequency.
struct Spectrum {
  std::vector<double> frequencies;  // ascending, zero included
  std::vector<double> psd;          // per unit angular frequency
  double bin_width = 0.0;
  double mean_power = 0.0;  // (1/M) sum |x_j|^2 of the analysed window

  /// Index of the bin nearest to `w`.
  [[nodiscard]] std::size_t bin_of(double w) const;
};

/// Periodogram of the last round(2 pi / (resolution dt)) samples of
/// `series` (rectangular window). Throws ConfigError when the series is
/// shorter than that. Sum psd * bin_width equals mean_power.
Spectrum psd(std::span<const complex> series, double dt, double resolution);

struct SidebandPowers {
  double plus = 0.0;   // power within +-2 bins of +omega_B
  double minus = 0.0;  // same around -omega_B
  double noise_floor = 0.0;  // median psd * bin_width
  bool resolved = false;     // both sidebands at least 10x the noise floor

  [[nodiscard]] double asymmetry() const {
    const double s = plus + minus;
    return s > 0.0 ? (plus - minus) / s : 0.0;
  }
};

SidebandPowers sideband_powers(const Spectrum& spectrum, double omega_B);

/// Frequency (>= 0) of the largest non-DC peak of a real series, from its
/// periodogram over the whole record after removing the mean.
double dominant_frequency(std::span<const double> series, double dt);

struct VelocityFit {
  double sites_per_period = 0.0;
  double residual = 0.0;  // rms deviation of the period averages from the fit, in sites
  std::size_t periods = 0;
  bool steady = true;  // residual <= max(0.2 |slope|, 1e-3 sites)
};

/// Linear fit of the period-averaged centroid (in units of the lattice
/// period pi) against the period index. Samples before `discard` are
/// dropped; at least five whole periods must remain and the sample spacing
/// must divide the Bloch period.
VelocityFit numeric_transport_velocity(std::span<const double> centroid, double sample_dt,
                                       double omega_B, double discard = 0.0);

/// Half the peak-to-peak excursion of `series` within each whole Bloch
/// period after `discard`, averaged over periods. Zero when no whole period
/// remains.
double periodic_amplitude(std::span<const double> series, double sample_dt, double omega_B,
                          double discard = 0.0);

struct AnalyticVelocity {
  double sites_per_period = 0.0;  // 2 pi c1 / omega_B (drift per period, in sites)
  double printed = 0.0;           // closed form without the 2 pi, as usually quoted
  double sideband_form = 0.0;     // same closed form via the two sideband Lorentzians
  double u1 = 0.0;
  double delta_plus = 0.0;   // delta0 - omega_B
  double delta_minus = 0.0;  // delta0 + omega_B
  bool in_regime = true;     // |u1| / omega_B < 1
};

/// Transport velocity from the reduced model with only the +-1 sidebands
/// kept. `s0` is the initial depth u0 |alpha0|^2, `delta0` the effective
/// detuning Delta_c - N u0 gamma0. Throws NumericalError if the two closed
/// forms disagree beyond 1e-12 relative. Logs a warning out of regime, or
/// throws RegimeError when `strict`.
AnalyticVelocity analytic_transport_velocity(const ScaledParams& scaled, const MatrixElements& elements,
                                             double sigma1, double s0, double delta0,
                                             bool strict = false);

/// Asymptotic cavity fluctuation for a coherence drive
/// 2 N sigma1 cos(omega_B t + theta1), from the Bessel series
/// -alpha0 e^{-i x sin phi} sum_n i n omega_B J_n(x) e^{i n phi} / (kappa - i delta_n)
/// with x = u1 / omega_B, truncated once |J_n(x)| < 1e-10.
complex jacobi_anger_field(const ScaledParams& scaled, double delta0, double u1, double theta1,
                           complex alpha0, double t);

/// Time average of |delta_alpha|^2 keeping only n = +-1.
double mean_fluctuation_power(const ScaledParams& scaled, double delta0, double u1, complex alpha0);

struct LoopWork {
  double per_period = 0.0;  // mean work done on the atoms per Bloch period
  std::vector<double> loops;  // per period
  bool clockwise = false;   // orientation of the loops in the (z, F) plane, from their signed area
  bool closed = true;       // endpoints within 5% of the loop extent
};

/// Integral of F dz along the path over each whole Bloch period
/// (trapezoidal). For a closed loop this is minus its shoelace area; while
/// the packet drifts the loops do not close, and the path integral is the
/// one that balances the tilt energy exactly (Ehrenfest, with <p> periodic).
/// Positive means work done on the atoms, which goes with clockwise
/// traversal when z is on the horizontal axis.
LoopWork loop_work(std::span<const double> centroid, std::span<const double> force,
                   double sample_dt, double omega_B, double discard = 0.0);

struct MetrologyEstimate {
  double coherence_time = 0.0;  // s
  double tau_sp = 0.0;          // s
  double cooperativity = 0.0;
  double chi_prime = 0.0;
  double wavelength_shift_fraction = 0.0;
};

/// Momentum-diffusion coherence time
/// tau = tau_sp / (1 + 2 C <sin^2 2kz> kappa^2 / (kappa^2 + Delta_f^2)) with
/// <sin^2 2kz> = 1/2 and 1/tau_sp = 2 gamma |alpha|^2 Omega0^2 / Delta_a^2.
/// Omega0^2 = U0 Delta_a. C defaults to Omega0^2 / (2 kappa gamma) and may be
/// overridden. `mean_delta_f` is in rad/s.
MetrologyEstimate coherence_time(const PhysicalParams& physical, double mean_photons,
                                 double mean_delta_f,
                                 std::optional<double> cooperativity = std::nullopt);

struct RefractiveEstimate {
  double chi_prime = 0.0;                  // -(Vc/V) N U0 / omega_c
  double wavelength_shift_fraction = 0.0;  // 2 kappa / omega_L
};

RefractiveEstimate refractive_estimate(const PhysicalParams& physical, double volume_ratio = 1.0);

}  // namespace blochcav
