#pragma once

#include <stdexcept>
#include <string>

namespace msmcell {

// Base for all solver-facing failures. CLI maps these to exit code 3,
// config/input problems (ConfigError and friends) to exit code 2.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
  using Error::Error;
};

// Invalid particle layout: bad extents, degenerate polygon, out-of-range
// volume fraction or aspect ratio.
struct GeometryError : ConfigError {
  using ConfigError::ConfigError;
};

// Particles overlap or touch on the periodic cell.
struct OverlapError : GeometryError {
  using GeometryError::GeometryError;
};

// Grid resolution unusable: not a power of two, too small, or a particle
// rasterizes to zero pixels.
struct ResolutionError : ConfigError {
  using ConfigError::ConfigError;
};

// A stiffness matrix fails positive definiteness.
struct DefinitenessError : ConfigError {
  using ConfigError::ConfigError;
};

// Iterative solve exhausted its iteration budget.
struct ConvergenceError : Error {
  using Error::Error;
};

// Assignment enumeration would exceed the supported particle count.
struct SizeError : Error {
  using Error::Error;
};

// Root bracketing failed: no sign change over the given interval.
struct NoBracketError : Error {
  using Error::Error;
};

}  // namespace msmcell
