#pragma once

#include <stdexcept>
#include <string>

namespace fanet {

// Error taxonomy shared across the library. The CLI maps these to process
// exit codes: ConfigError -> 2, DataError -> 3, NumericError (and anything
// else escaping) -> 4.

// Bad user-facing configuration: unknown keys, out-of-range values,
// inconsistent model dimensions.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or incompatible inputs: unreadable CSV, missing columns,
// checkpoint/shape mismatches, datasets too short to window.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure at runtime: non-finite values, solver instability,
// degenerate geometry.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Contract violation between library components (mismatched tensor shapes,
// rank errors). These indicate caller bugs rather than bad user input.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace fanet
