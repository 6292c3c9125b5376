#pragma once

#include <stdexcept>
#include <string>

namespace covkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a special function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise malformed numeric input.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Model parameters outside their admissible range, or an unknown family.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Incompatible number of variables or dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Failure while evaluating a kernel at a concrete pair of locations.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Matrix could not be factorized even after the jitter schedule.
class NotPsdError : public Error {
 public:
  NotPsdError(const std::string& what, double min_eigenvalue)
      : Error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

}  // namespace covkit
