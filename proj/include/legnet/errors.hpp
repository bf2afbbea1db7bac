#pragma once

#include <stdexcept>
#include <string>

namespace legnet {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed inputs: bad tables, bad documents, structural violations.
// The CLI maps these to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class UnknownVariableError : public ValidationError {
 public:
  explicit UnknownVariableError(const std::string& var)
      : ValidationError("unknown variable '" + var + "'") {}
};

// Numeric failures during updating. The CLI maps these to exit code 2.

// A margin frozen at 0 or 1 cannot move: ratio updates preserve zeros.
class UnreachableMarginError : public Error {
 public:
  using Error::Error;
};

// Hard conditioning on an event of probability zero.
class ImpossibleEvidenceError : public Error {
 public:
  using Error::Error;
};

// Iterative fitting failed to reach tolerance within the sweep budget.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Constraint set with no satisfying distribution.
class InfeasibleConstraintsError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace legnet
