#pragma once

#include <stdexcept>
#include <string>

namespace blochcav {

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN/overflow, box-edge saturation or an ill-posed numerical problem.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An analytic formula was evaluated outside its stated validity regime.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace blochcav
