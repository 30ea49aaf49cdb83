#pragma once

#include <stdexcept>
#include <string>

namespace delaypred {

// Bad dimensions, out-of-range indices, disturbances outside [-a, a].
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A stabilizer or Lyapunov matrix that does not satisfy its invariants.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An optimizer or bracket that could not produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent user configuration (scenario files, certification set-ups).
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace delaypred
