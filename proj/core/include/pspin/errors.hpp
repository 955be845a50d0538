#pragma once

#include <stdexcept>
#include <string>

namespace pspin {

/// Argument outside the mathematical domain of an operation (e.g. |t| > 1 in xi).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Tensor order / dimension mismatch.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad user configuration: unknown distribution, violated parameter ordering, ...
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// NaN / overflow encountered during a numerical routine.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal invariant failed. Indicates a bug, never bad input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pspin
