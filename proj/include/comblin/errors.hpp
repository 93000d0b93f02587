#pragma once

#include <stdexcept>
#include <string>

namespace comblin {

// Malformed data: out-of-range indices, length mismatches, bad files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Algorithm or experiment parameters outside their admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Loss of positive-definiteness or another unrecoverable floating-point failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace comblin
