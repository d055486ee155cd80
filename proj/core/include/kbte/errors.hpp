#pragma once

#include <stdexcept>
#include <string>

namespace kbte {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failures: the inputs were valid but the computation could not
/// produce a trustworthy answer. The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DegenerateGradient : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class LeftDomain : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ExitNotFound : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonContractive : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NegativeInput : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NegativeDistribution : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonPositiveChannel : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Configuration problems (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, int line = -1, std::string key = {})
      : ConfigError(line >= 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line),
        key_(std::move(key)) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

class ValidationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// File-system and serialization failures (exit code 1).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kbte
