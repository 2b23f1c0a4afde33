#pragma once

#include <stdexcept>
#include <string>

namespace drr {

/// Base for all errors raised by the toolkit. `exit_code()` maps the error
/// class to the CLI exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 2; }
  virtual const char* kind() const noexcept { return "data"; }
};

/// Bad usage, invalid configuration or hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
  const char* kind() const noexcept override { return "config"; }
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or gradient during optimization.
class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
  const char* kind() const noexcept override { return "numeric"; }
};

// Binary container failures.
class VersionError : public DataError {
 public:
  using DataError::DataError;
  const char* kind() const noexcept override { return "version"; }
};

class ShapeError : public DataError {
 public:
  using DataError::DataError;
  const char* kind() const noexcept override { return "shape"; }
};

class TruncatedError : public DataError {
 public:
  using DataError::DataError;
  const char* kind() const noexcept override { return "truncated"; }
};

}  // namespace drr
