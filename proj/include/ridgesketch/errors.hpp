#pragma once

#include <stdexcept>
#include <string>

namespace ridgesketch {

// A precondition on user-supplied input was violated (bad shape, parameter
// outside its domain, malformed config or dataset).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure could not deliver a trustworthy answer (no bracket,
// failed factorization, non-monotone objective).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ridgesketch
