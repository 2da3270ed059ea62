#pragma once

#include <stdexcept>
#include <string>

namespace xbar {

/// Boltzmann constant in J/K (2019 SI exact value).
inline constexpr double kBoltzmann = 1.380649e-23;

/// Base class for all simulator errors.
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, parameters or input files. CLI maps this to exit code 2.
struct ConfigError : SimError {
  using SimError::SimError;
};

/// Input file could not be parsed; message carries file and line number.
struct ParseError : ConfigError {
  using ConfigError::ConfigError;
};

/// Shape mismatch between operands.
struct DimensionError : SimError {
  using SimError::SimError;
};

/// Device endurance exhausted.
struct DeviceWornError : SimError {
  using SimError::SimError;
};

/// Operation not supported by the device or configuration.
struct UnsupportedError : SimError {
  using SimError::SimError;
};

/// Linear solve failed (singular or non-converged network).
struct NumericalError : SimError {
  using SimError::SimError;
};

} // namespace xbar
