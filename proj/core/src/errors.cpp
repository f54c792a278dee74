#include "mpcci/errors.hpp"

namespace mpcci {

std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::Configuration: return "configuration";
    case ErrorCategory::Domain: return "domain";
    case ErrorCategory::DegenerateBound: return "degenerate-bound";
    case ErrorCategory::GridTooCoarse: return "grid-too-coarse";
    case ErrorCategory::Alignment: return "alignment";
    case ErrorCategory::Parity: return "parity";
    case ErrorCategory::Range: return "range";
    case ErrorCategory::Numerical: return "numerical";
    case ErrorCategory::Unsupported: return "unsupported";
    case ErrorCategory::Io: return "io";
    case ErrorCategory::Internal: return "internal";
  }
  return "unknown";
}

int exit_code(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::Configuration: return 2;
    case ErrorCategory::Domain: return 3;
    case ErrorCategory::DegenerateBound: return 4;
    case ErrorCategory::GridTooCoarse: return 5;
    case ErrorCategory::Alignment: return 6;
    case ErrorCategory::Parity: return 7;
    case ErrorCategory::Range: return 8;
    case ErrorCategory::Numerical: return 9;
    case ErrorCategory::Unsupported: return 10;
    case ErrorCategory::Io: return 11;
    case ErrorCategory::Internal: return 12;
  }
  return 1;
}

Error::Error(ErrorCategory category, const std::string& message)
    : std::runtime_error(std::string(category_name(category)) + " error: " + message),
      category_(category) {}

void fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

}  // namespace mpcci
