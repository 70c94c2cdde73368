#pragma once

#include <stdexcept>
#include <string>

namespace acyl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite entries, bad sizes, out-of-range options.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

/// A matrix expected to be positive semidefinite has a clearly negative eigenvalue.
class NotPsdError : public Error {
 public:
  using Error::Error;
};

/// A rank requirement (full row rank, rank K = k, ...) is violated.
class RankError : public Error {
 public:
  using Error::Error;
};

/// A structural condition of a theorem does not hold (output regularity,
/// controller solvability). Carries the relative residual that failed.
class StructuralError : public Error {
 public:
  StructuralError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// No feasible point was found by the numerical search.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// The objective of a minimization fell below the unboundedness threshold.
class UnboundedError : public Error {
 public:
  using Error::Error;
};

/// The controller cannot be realized for a nonzero feedthrough E1.
class NotRealizableError : public Error {
 public:
  using Error::Error;
};

/// The simulated state became non-finite.
class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, double last_valid_time)
      : Error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

/// Problem or controller file syntax/semantic error with a source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace acyl
