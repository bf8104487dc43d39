#pragma once

#include <numbers>

namespace blochcav {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;           // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double speed_of_light = 299792458.0;     // m/s
inline constexpr double standard_gravity = 9.80665;       // m/s^2
inline constexpr double sr88_mass_u = 87.9056121;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
}  // namespace constants

/// Laboratory parameters of the atom-cavity system, SI units.
///
/// All rates are angular frequencies (rad/s). `cavity_decay` is the field
/// amplitude decay rate kappa; the cavity energy decay rate is 2 kappa.
/// `atomic_linewidth` is gamma, half the free-space spontaneous emission rate.
struct PhysicalParams {
  double atom_mass = 0.0;           // kg
  double lattice_wavelength = 0.0;  // m, lattice period d = lambda/2
  double bias_force = 0.0;          // N, negative: points towards -z
  double cavity_decay = 0.0;        // kappa
  double pump_rate = 0.0;           // eta = sqrt(J kappa)
  double cavity_detuning = 0.0;     // Delta_c = omega_L - omega_c
  double atom_light_shift = 0.0;    // U0 = Omega0^2 / Delta_a
  double atom_number = 1.0;         // N
  double atomic_linewidth = 0.0;    // gamma
  double atom_detuning = 0.0;       // Delta_a = omega_L - omega_a
  double pump_frequency = 0.0;      // omega_L; 0 means 2 pi c / lambda

  [[nodiscard]] double lattice_period() const { return 0.5 * lattice_wavelength; }
  [[nodiscard]] double recoil_wavenumber() const {
    return constants::two_pi / lattice_wavelength;
  }
  [[nodiscard]] double laser_frequency() const;

  /// Throws ConfigError if a structural invariant is violated.
  void validate() const;
};

/// Dimensionless parameters in recoil units: time in 1/omega_r, length in
/// 1/k_r, energy in E_r = hbar omega_r. The lattice period is pi.
struct ScaledParams {
  double omega_B = 0.0;
  double f = 0.0;  // tilt, always -omega_B / pi
  double kappa = 0.0;
  double eta = 0.0;
  double delta_c = 0.0;
  double u0 = 0.0;
  double n_atoms = 1.0;
  double recoil_freq = 0.0;  // rad/s, kept for converting results back

  [[nodiscard]] double bloch_period() const {
    return constants::two_pi / omega_B;
  }
  /// Collective dispersive shift N u0.
  [[nodiscard]] double collective_shift() const { return n_atoms * u0; }
};

/// |F| d / hbar.
double bloch_frequency(const PhysicalParams& physical);

/// hbar k_r^2 / (2 m) with k_r = 2 pi / lambda.
double recoil_frequency(const PhysicalParams& physical);

ScaledParams scale(const PhysicalParams& physical);

/// Inverse of scale(). Mass and wavelength are taken from `reference`
/// (they set the unit system and are not part of ScaledParams); the
/// atom-level fields not represented in ScaledParams are copied over.
PhysicalParams unscale(const ScaledParams& scaled, const PhysicalParams& reference);

/// Delta_a -> r Delta_a, U0 -> U0 / r, N -> r N, eta -> sqrt(r) eta.
/// Leaves N U0 and the stationary lattice depth unchanged.
PhysicalParams rescale_atom_detuning(const PhysicalParams& physical, double r);

/// 88Sr in a 689 nm lattice under standard gravity, with the cavity and
/// coupling constants used throughout the reference scenarios
/// (kappa = 2 pi x 1 kHz, U0 = -2 pi x 1 Hz, N = 1000,
/// gamma = 2 pi x 7.6 kHz, Delta_a = -2 pi x 10 MHz). Pump rate and cavity
/// detuning are left at zero.
PhysicalParams strontium_reference();

/// Bias force that produces the given Bloch frequency (rad/s) for the
/// lattice period of `physical`. Negative by convention.
double bias_force_for_bloch_frequency(const PhysicalParams& physical, double omega_B);

}  // namespace blochcav
