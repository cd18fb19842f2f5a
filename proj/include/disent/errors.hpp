#pragma once

#include <stdexcept>

namespace disent {

// Range violations surface as std::out_of_range and malformed arguments as
// std::invalid_argument. The types below cover the remaining failure kinds.

/// An eigensolver or other dense kernel did not converge.
class numeric_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A rejection sampler exhausted its retry budget.
class sampling_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A file could not be parsed or failed validation. what() names the first
/// failed check.
class input_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace disent
