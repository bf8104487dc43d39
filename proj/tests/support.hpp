#pragma once

#include <blochcav/units.hpp>

namespace blochcav::test {

// Strontium reference with the 744.5 Hz Bloch frequency of the figure runs.
inline PhysicalParams reference_physical() {
  auto p = strontium_reference();
  p.bias_force = bias_force_for_bloch_frequency(p, constants::two_pi * 744.5);
  return p;
}

inline ScaledParams reference_scaled() { return scale(reference_physical()); }

}  // namespace blochcav::test
