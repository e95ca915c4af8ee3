#pragma once

#include <stdexcept>
#include <string>

namespace levybsde {

/// Bad caller input: wrong sizes, out-of-range parameters, empty vectors.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation outside a function's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed: nonconvergent quadrature, divergent
/// moment, Picard iteration that did not settle. The message carries the
/// diagnostics.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A basis direction needed by the caller was pruned as degenerate.
class DegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Explicit time step violates the stability bound of a PDIE solver.
class StepSizeError : public NumericalError {
 public:
  StepSizeError(const std::string& what, int suggested_steps)
      : NumericalError(what), suggested_steps_(suggested_steps) {}
  int suggested_steps() const noexcept { return suggested_steps_; }

 private:
  int suggested_steps_;
};

/// Operation not available for the model's jump representation.
class UnsupportedRepresentation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace levybsde
