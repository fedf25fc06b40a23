#pragma once

#include <stdexcept>
#include <string>

namespace sue {

/// Malformed input file. Carries the 1-based line number when one applies.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Structurally valid input that violates a model invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Origin cannot reach destination in the network.
class NoPathError : public std::runtime_error {
 public:
  NoPathError(int origin, int destination);
  int origin() const noexcept { return origin_; }
  int destination() const noexcept { return destination_; }

 private:
  int origin_;
  int destination_;
};

/// Operator applied against a flow state it was not built from.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Eigensolver or other dense numerical routine failed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sue
