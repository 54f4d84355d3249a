#pragma once

#include <stdexcept>
#include <string>

namespace pitopt {

/// Invalid user-facing configuration (mesh spans, time grids, config files).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Failure inside the numerics (singular factorization, non-finite values).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pitopt
