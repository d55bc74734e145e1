#pragma once

#include <stdexcept>
#include <string>

namespace gcrl {

/// Index outside the bounds of a model or table.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Malformed model: non-stochastic rows, bad distributions, bad discount.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Shapes of two tables or arrays do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation invoked in the wrong lifecycle state (finished episode, empty buffer).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A documented precondition of the operation does not hold.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class PolicyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Text input (model file, checkpoint, config) could not be parsed.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gcrl
