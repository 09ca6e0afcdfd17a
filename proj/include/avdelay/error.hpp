#pragma once

#include <stdexcept>
#include <string>

namespace avdelay {

// Root of the library's exception hierarchy. The CLI maps validation-type
// errors to exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual bool is_validation() const noexcept { return false; }
};

class InvalidInput : public Error {
 public:
  using Error::Error;
  bool is_validation() const noexcept override { return true; }
};

class SchemaError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class FileNotFound : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ConditioningError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace avdelay
