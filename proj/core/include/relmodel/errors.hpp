#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relmodel {

// Error classes are disjoint; the CLI maps each to its own exit code.
enum class ErrorKind {
  parse,
  validation,
  feasibility,
  boundary,
  convergence,
  size_guard,
  domain,
  internal,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Iterative solver hit its iteration cap; carries the last residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double last_residual);

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace relmodel
