#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vff {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Query outside a curve's evaluation domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Least-squares system without a unique solution.
class SingularFitError : public std::runtime_error {
 public:
  SingularFitError(const std::string& what, double condition_ratio)
      : std::runtime_error(what), condition_ratio_(condition_ratio) {}

  /// Estimated smallest / largest singular value of the basis matrix.
  double condition_ratio() const noexcept { return condition_ratio_; }

 private:
  double condition_ratio_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NonMonotoneTimeError : public ParseError {
 public:
  using ParseError::ParseError;
};

class DimensionMismatchError : public ParseError {
 public:
  using ParseError::ParseError;
};

class FormatVersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an episode leaves the finite state space.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vff
