#pragma once

#include <stdexcept>
#include <string>

namespace levcool {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad parameter, wrong domain).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not deliver its accuracy guarantee.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The belief assigns (near) zero probability to an observed outcome.
class ImpossibleOutcome : public Error {
 public:
  using Error::Error;
};

/// The threshold passed to the width extraction exceeds the density maximum.
class ThresholdTooHigh : public Error {
 public:
  using Error::Error;
};

/// The detuning closed form has no real solution for the requested p_up.
class DetuningUndefined : public Error {
 public:
  using Error::Error;
};

/// A phase-space grid is too small for the requested state or operation.
class GridTooSmall : public Error {
 public:
  using Error::Error;
};

}  // namespace levcool
