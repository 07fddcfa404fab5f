#pragma once

#include <stdexcept>
#include <string>

namespace metaadapt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A concern or model document does not match its schema.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A structurally valid model breaks one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class SynthesisError : public Error {
 public:
  using Error::Error;
};

/// State or action universes of two models (or a model and a policy) disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A rollout batch was used with parameters other than the ones that generated it.
class StalenessError : public Error {
 public:
  using Error::Error;
};

class DegenerateStateError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace metaadapt
