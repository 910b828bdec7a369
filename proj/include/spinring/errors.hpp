#pragma once

#include <stdexcept>
#include <string>

namespace spinring {

// Precondition violated by the caller (bad dimension, out-of-range index...).
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A numerical kernel could not produce a trustworthy result.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input is well-formed but degenerate for the requested measure, e.g. a
// zero fidelity error in a log-sensitivity or a zero-variance sample.
struct DegenerateError : std::domain_error {
  using std::domain_error::domain_error;
};

}  // namespace spinring
