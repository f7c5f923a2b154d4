#pragma once

#include <stdexcept>
#include <string>

namespace evi {

// Invalid sizes, parameters, or malformed input files.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Arguments outside an operation's domain, e.g. test directions with
// negative components where the dissipation is +infinity.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Solver breakdown: CG stagnation, active-set cycling, and similar.
// Carries the last residual so callers can report it.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg, double residual = 0.0)
      : std::runtime_error(msg), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace evi
