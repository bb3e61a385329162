#pragma once

#include <stdexcept>
#include <string>

namespace inlu {

// Base of every error thrown by the library. Callers that only need a
// message can catch this; tests and the CLI dispatch on the subclasses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ADD payload empty or containing whitespace, or missing where required.
class InvalidPayloadError : public Error {
 public:
  using Error::Error;
};

// REVOKE with nothing left to revoke.
class UnderflowError : public Error {
 public:
  using Error::Error;
};

// Internal state disagreement: featurizer/buffer desync, length mismatches,
// dimension mismatches.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// Unknown component, bad parameter value, unsatisfied upstream annotation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Empty or otherwise unusable training data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed training-data or config file.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed data violating a dataset invariant (overlapping spans, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

// Model bundle cannot be read back.
class LoadError : public Error {
 public:
  using Error::Error;
};

// Hyperparameter outside its domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

}  // namespace inlu
