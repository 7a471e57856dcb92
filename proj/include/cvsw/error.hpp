#pragma once

#include <stdexcept>
#include <string>

namespace cvsw {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model parameter (a = 1, kappa <= 0, a = -1 for the coefficient layer, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Two fields that must share a grid do not.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// A map that should be an orientation-preserving diffeomorphism is not.
class NonDiffeomorphismError : public Error {
 public:
  using Error::Error;
};

/// An iterative solve did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration file, override or initial-condition descriptor.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cvsw
