#pragma once

#include <stdexcept>
#include <string>

namespace tsql {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state or action index is out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// The MDP (or a table paired with it) is malformed.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// An experiment or CLI configuration is invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap before reaching tolerance.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace tsql
