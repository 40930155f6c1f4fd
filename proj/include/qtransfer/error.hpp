#pragma once

#include <stdexcept>
#include <string>

namespace qtransfer {

/// Base of every exception thrown by the library. The kind decides the CLI
/// exit status.
class Error : public std::runtime_error {
 public:
  enum class Kind { config, convergence, invariant, dimension };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Kind::config, what) {}
};

/// Quadrature or time stepping did not reach its tolerance. Carries the
/// achieved error estimate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : Error(Kind::convergence, what + " (achieved error " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}

  double achieved_error() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(Kind::invariant, what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(Kind::dimension, what) {}
};

}  // namespace qtransfer
