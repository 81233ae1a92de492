#pragma once

#include <stdexcept>
#include <string>

namespace exkin {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad parameters, malformed config, unknown names.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// A computation produced an unusable result (non-finite values,
/// positivity loss that could not be repaired, failed equilibrium solve).
class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace exkin
