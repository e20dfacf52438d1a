#pragma once

#include <stdexcept>
#include <string>

namespace aitv {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or incompatible inputs. The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidConfig : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidAlpha : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidBeta : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// log(u) requested at a pixel with u <= 0 while the observation there is
// positive.
class NonPositiveIntensity : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NegativeMean : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class AllZeroImage : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RowOutOfRange : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TooSmall : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Readable file, but not a grayscale image we accept (color, palette, ...).
class UnsupportedImage : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Numerical breakdown inside a solve. The CLI maps these to exit code 1.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

class NonFiniteIterate : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

// Inverse transform of data that should be real came back with a
// non-negligible imaginary part; an operator/symbol mismatch upstream.
class NonNegligibleImaginary : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

// Filesystem and file-format failures. The CLI maps these to exit code 3.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace aitv
