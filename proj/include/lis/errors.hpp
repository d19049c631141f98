#pragma once

#include <stdexcept>
#include <string>

namespace lis {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (bad keys, non-divisible geometry, Np > K, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: non-finite input, loss of definiteness, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Shape or index mismatch between arguments.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace lis
