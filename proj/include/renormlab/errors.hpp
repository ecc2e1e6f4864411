#pragma once

#include <stdexcept>
#include <string>

namespace renormlab {

/// An argument lies outside the admissible range of an operation.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A probe was asked to verify a statement whose hypothesis does not hold
/// for the given input. Not a verification failure.
class HypothesisNotMet : public std::invalid_argument {
 public:
  explicit HypothesisNotMet(const std::string& what)
      : std::invalid_argument("hypothesis not met: " + what) {}
};

/// A numerical routine could not reach its postcondition (bracket failure,
/// exhausted search budget, empty slice, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A condition that valid inputs guarantee was violated; signals a broken
/// norm oracle or a bug.
class InternalInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A cascade configuration failed validation.
class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace renormlab
