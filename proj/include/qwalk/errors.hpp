#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad argument or configuration value (a usage problem, not a numerical one).
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// Numerical guard tripped: the run cannot be trusted if it continues.
class NumericalGuardError : public Error {
  public:
    using Error::Error;
};

/// Population reached the edge of the momentum window.
class GridLeakageError : public NumericalGuardError {
  public:
    using NumericalGuardError::NumericalGuardError;
};

/// The Bessel expansion order is too small for the requested kick strength.
class TruncationError : public NumericalGuardError {
  public:
    using NumericalGuardError::NumericalGuardError;
};

}  // namespace qwalk
