#pragma once

#include <stdexcept>
#include <string>

namespace wavest {

/// Malformed arguments (degenerate boxes, degrees out of range, ...).
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A value is outside the mathematical domain of an operation
/// (nonpositive wavespeed, point outside the mesh, time outside a slab).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Inconsistent problem or experiment configuration.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A linear solve did not meet its residual contract.
class SolverFailure : public std::runtime_error {
  public:
    SolverFailure(const std::string& what, double residual)
        : std::runtime_error(what + " (relative residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

} // namespace wavest
