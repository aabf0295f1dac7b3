#pragma once

#include <stdexcept>

namespace mosaic {

// Bad configuration file / CLI input. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runtime numerical failure (eigensolver non-convergence, NaN blowup, a
// violated solver postcondition). The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Residue extraction hit a near-defective eigenvector or a collapsed pole
// pair. Callers are expected to fall back to direct time integration.
struct IllConditionedDecomposition : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace mosaic
