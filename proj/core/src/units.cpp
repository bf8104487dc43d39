#include "blochcav/units.hpp"

#include <cmath>
#include <string>

#include "blochcav/errors.hpp"

namespace blochcav {

double PhysicalParams::laser_frequency() const {
  if (pump_frequency > 0.0) return pump_frequency;
  return constants::two_pi * constants::speed_of_light / lattice_wavelength;
}

void PhysicalParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("physical: ") + what);
  };
  require(atom_mass > 0.0, "atom_mass must be positive");
  require(lattice_wavelength > 0.0, "lattice_wavelength must be positive");
  require(cavity_decay > 0.0, "cavity_decay must be positive");
  require(atom_number >= 1.0, "atom_number must be at least 1");
  require(bias_force < 0.0, "bias_force must be negative (force towards -z)");
  require(pump_rate >= 0.0, "pump_rate must be non-negative");
  require(atomic_linewidth >= 0.0, "atomic_linewidth must be non-negative");
  require(std::isfinite(cavity_detuning) && std::isfinite(atom_light_shift),
          "detunings must be finite");
}

double bloch_frequency(const PhysicalParams& physical) {
  return std::abs(physical.bias_force) * physical.lattice_period() / constants::hbar;
}

double recoil_frequency(const PhysicalParams& physical) {
  const double k = physical.recoil_wavenumber();
  return constants::hbar * k * k / (2.0 * physical.atom_mass);
}

ScaledParams scale(const PhysicalParams& physical) {
  const double wr = recoil_frequency(physical);
  ScaledParams s;
  s.recoil_freq = wr;
  s.omega_B = bloch_frequency(physical) / wr;
  s.f = -s.omega_B / std::numbers::pi;
  s.kappa = physical.cavity_decay / wr;
  s.eta = physical.pump_rate / wr;
  s.delta_c = physical.cavity_detuning / wr;
  s.u0 = physical.atom_light_shift / wr;
  s.n_atoms = physical.atom_number;
  return s;
}

PhysicalParams unscale(const ScaledParams& scaled, const PhysicalParams& reference) {
  PhysicalParams p = reference;
  const double wr = recoil_frequency(reference);
  p.bias_force = -scaled.omega_B * wr * constants::hbar / reference.lattice_period();
  p.cavity_decay = scaled.kappa * wr;
  p.pump_rate = scaled.eta * wr;
  p.cavity_detuning = scaled.delta_c * wr;
  p.atom_light_shift = scaled.u0 * wr;
  p.atom_number = scaled.n_atoms;
  return p;
}

PhysicalParams rescale_atom_detuning(const PhysicalParams& physical, double r) {
  if (!(r > 0.0)) throw ConfigError("rescaling factor must be positive");
  PhysicalParams p = physical;
  p.atom_detuning *= r;
  p.atom_light_shift /= r;
  p.atom_number *= r;
  p.pump_rate *= std::sqrt(r);
  return p;
}

PhysicalParams strontium_reference() {
  using constants::two_pi;
  PhysicalParams p;
  p.atom_mass = constants::sr88_mass_u * constants::atomic_mass_unit;
  p.lattice_wavelength = 689e-9;
  p.bias_force = -p.atom_mass * constants::standard_gravity;
  p.cavity_decay = two_pi * 1.0e3;
  p.atom_light_shift = -two_pi * 1.0;
  p.atom_number = 1000.0;
  p.atomic_linewidth = two_pi * 7.6e3;
  p.atom_detuning = -two_pi * 10.0e6;
  return p;
}

double bias_force_for_bloch_frequency(const PhysicalParams& physical, double omega_B) {
  return -omega_B * constants::hbar / physical.lattice_period();
}

}  // namespace blochcav
