#pragma once

#include <stdexcept>
#include <string>

namespace qac {

// Invalid input or configuration. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Base for failures of a numerical procedure. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}
  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

class DegeneracyError : public NumericalError {
 public:
  explicit DegeneracyError(const std::string& what) : NumericalError("spectral", what) {}
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(std::string module, const std::string& what)
      : NumericalError(std::move(module), what) {}
};

class DefinitenessError : public NumericalError {
 public:
  explicit DefinitenessError(const std::string& what) : NumericalError("loops", what) {}
};

// A hypothesis the caller was required to establish does not hold.
class PreconditionError : public NumericalError {
 public:
  PreconditionError(std::string module, const std::string& what, double lhs, double rhs)
      : NumericalError(std::move(module), what), lhs_(lhs), rhs_(rhs) {}
  double lhs() const noexcept { return lhs_; }
  double rhs() const noexcept { return rhs_; }

 private:
  double lhs_;
  double rhs_;
};

}  // namespace qac
