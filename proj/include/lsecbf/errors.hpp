#pragma once

#include <stdexcept>
#include <string>

namespace lsecbf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments violate a documented precondition (dimensions, NaN, sign).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// No strictly feasible point exists (or none was found) for a set.
class EmptyInterior : public Error {
 public:
  using Error::Error;
};

/// Non-finite iterate, failed line search or non-finite integration result.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// KKT Jacobian is singular to working tolerance.
class SingularJacobian : public Error {
 public:
  using Error::Error;
};

/// Configuration could not be parsed or validated. `what()` names the field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lsecbf
