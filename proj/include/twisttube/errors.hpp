#pragma once

#include <stdexcept>
#include <string>

namespace twisttube {

// Root of every error raised by the library. Callers that only need a
// message catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class EmptyMask : public Error {
 public:
  using Error::Error;
};

class NonPositiveGroundState : public Error {
 public:
  NonPositiveGroundState(const std::string& what, double min_value)
      : Error(what), min_value_(min_value) {}
  double min_value() const { return min_value_; }

 private:
  double min_value_;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, int iterations, double worst_residual)
      : Error(what), iterations_(iterations), worst_residual_(worst_residual) {}
  int iterations() const { return iterations_; }
  double worst_residual() const { return worst_residual_; }

 private:
  int iterations_;
  double worst_residual_;
};

class CapExceeded : public Error {
 public:
  using Error::Error;
};

class InvalidC : public Error {
 public:
  using Error::Error;
};

class SigmaOutOfRange : public Error {
 public:
  using Error::Error;
};

class TruncationTooSmall : public Error {
 public:
  using Error::Error;
};

class QuadratureTooCoarse : public Error {
 public:
  using Error::Error;
};

class MemoryBudgetExceeded : public Error {
 public:
  MemoryBudgetExceeded(const std::string& what, double required_bytes)
      : Error(what), required_bytes_(required_bytes) {}
  double required_bytes() const { return required_bytes_; }

 private:
  double required_bytes_;
};

// Configuration problems carry the source position (1-based, 0 if unknown).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0)
      : Error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace twisttube
