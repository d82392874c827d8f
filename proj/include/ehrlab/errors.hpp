#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ehrlab {

// Base class for every error raised by the library. Callers that only care
// about "did it work" can catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (probability not
// in (0,1), rho outside (-1,1), non-finite input, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Matrix or grid dimensions that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration: bad quadrature order, eps = 0 where eps > 0 is
// required, wrong J kind for an operation, and so on.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A stated hypothesis of an operation does not hold. Carries the vector (or
// point) that violates it so the caller can inspect it.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& what, std::vector<double> witness)
      : Error(what), witness_(std::move(witness)) {}
  const std::vector<double>& witness() const noexcept { return witness_; }

 private:
  std::vector<double> witness_;
};

// Bisection could not bracket a feasible value.
class SearchError : public Error {
 public:
  SearchError(const std::string& what, std::vector<double> witness = {})
      : Error(what), witness_(std::move(witness)) {}
  const std::vector<double>& witness() const noexcept { return witness_; }

 private:
  std::vector<double> witness_;
};

// Two quadrature orders disagree by more than the allowed amount.
class PrecisionError : public Error {
 public:
  using Error::Error;
};

// Input is technically valid but degenerate for the requested computation
// (zero perturbation window, empty scan region, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace ehrlab
