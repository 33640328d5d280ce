#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace insane {

/// Base for every error raised by the library. The CLI maps subclasses onto
/// its exit-code taxonomy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameter values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure (open, read, write).
class IoError : public Error {
 public:
  using Error::Error;
};

/// An on-disk array does not have the byte length the manifest implies.
class SizeMismatchError : public Error {
 public:
  SizeMismatchError(const std::string& file, std::uintmax_t expected, std::uintmax_t actual)
      : Error(file + ": expected " + std::to_string(expected) + " bytes, found " +
              std::to_string(actual)),
        expected_bytes(expected),
        actual_bytes(actual) {}
  std::uintmax_t expected_bytes;
  std::uintmax_t actual_bytes;
};

/// Input data contains NaN or infinity.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Index outside the grid or a patch that would cross the image border.
class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Too few points for the requested method (k-NN style scorers, variability).
class InsufficientPointsError : public Error {
 public:
  using Error::Error;
};

/// An O(n^2) computation was requested above the configured point cap.
class ResourceCapError : public Error {
 public:
  using Error::Error;
};

/// Cholesky failure, solver non-convergence, non-finite gradients.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A normalization range collapsed to zero (constant ground truth).
class DegenerateRangeError : public Error {
 public:
  using Error::Error;
};

/// Every acquisition candidate has already been measured.
class ExhaustionError : public Error {
 public:
  using Error::Error;
};

}  // namespace insane
