#pragma once

#include <stdexcept>
#include <string>

namespace gestime {

// Base class for every error raised by the library. The CLI maps each
// subclass to its own exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, token order, shapes).
class InputFormatError : public Error {
 public:
  using Error::Error;
};

// Invalid parameters or preconditions on configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during training or evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Bad command-line usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace gestime
