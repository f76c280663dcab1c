#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tbdyn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Probability reached the edge of a finite window beyond the allowed tolerance.
class LeakError : public Error {
 public:
  LeakError(const std::string& what, double leaked) : Error(what), leaked_(leaked) {}
  double leaked() const noexcept { return leaked_; }

 private:
  double leaked_;
};

/// An iterative numerical procedure failed to reach its target accuracy.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A scenario file failed to parse or validate; `field` and `line` locate the problem
/// (line is 0 when unknown).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string field = {}, int line = 0)
      : Error(what), field_(std::move(field)), line_(line) {}
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

}  // namespace tbdyn
