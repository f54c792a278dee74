#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpcci {

// Diagnostic categories. Every exception thrown by the library carries one,
// and the command-line tool maps each category to a distinct exit code.
enum class ErrorCategory {
  Configuration,   // invalid model/grid/experiment parameters
  Domain,          // argument outside a function's mathematical domain
  DegenerateBound, // tail bound not available for |rho| = 1
  GridTooCoarse,   // grid step too large for the requested construction
  Alignment,       // payoff kink line not on grid nodes
  Parity,          // odd panel count where Simpson needs an even one
  Range,           // query outside the computational domain
  Numerical,       // non-finite or unstable intermediate values
  Unsupported,     // feature not available for the given input
  Io,              // file read/write failures and malformed files
  Internal         // violated internal invariant (shape mismatch, ...)
};

std::string_view category_name(ErrorCategory c) noexcept;

// Process exit code used by the CLI for a category (0 is reserved for success).
int exit_code(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message);
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] void fail(ErrorCategory category, const std::string& message);

inline void require(bool condition, ErrorCategory category, const std::string& message) {
  if (!condition) fail(category, message);
}

}  // namespace mpcci
