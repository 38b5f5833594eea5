#include "relmodel/errors.hpp"

namespace relmodel {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::feasibility: return "feasibility";
    case ErrorKind::boundary: return "boundary";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::size_guard: return "size-guard";
    case ErrorKind::domain: return "domain";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

ConvergenceError::ConvergenceError(const std::string& message,
                                   double last_residual)
    : Error(ErrorKind::convergence, message), last_residual_(last_residual) {}

}  // namespace relmodel
