#pragma once

#include <stdexcept>
#include <string>

namespace gsnprobe {

// Error taxonomy. The CLI maps each family onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed arguments that violate a precondition.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Input data is malformed or fails validation.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A probability vector failed validation.
class ValidationError : public FormatError {
 public:
  using FormatError::FormatError;
};

// A conditional-model backend failed to produce a usable answer.
class BackendError : public Error {
 public:
  using Error::Error;
};

class ConnectionError : public BackendError {
 public:
  ConnectionError(const std::string& what, int attempts)
      : BackendError(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

// Local configuration disagrees with what a backend reports.
class ConfigError : public BackendError {
 public:
  using BackendError::BackendError;
};

// Iterative numerical procedure failed to converge.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_gap)
      : Error(what), last_gap_(last_gap) {}
  double last_gap() const { return last_gap_; }

 private:
  double last_gap_;
};

// The transition kernel is reducible, so no unique stationary vector exists.
class NonErgodicError : public Error {
 public:
  using Error::Error;
};

}  // namespace gsnprobe
