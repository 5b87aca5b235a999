#pragma once

#include <stdexcept>
#include <string>

namespace srf {

// Bad user input: malformed data, out-of-range parameters, unknown names.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A solver or integrator could not produce a trustworthy answer.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace srf
