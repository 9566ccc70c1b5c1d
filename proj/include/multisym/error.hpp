#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace multisym {

/// Stable error categories. The numeric values double as CLI exit codes.
enum class ErrorCode : int {
  IdentityFailure = 1,
  Input = 2,
  Numeric = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed user input: bad spec files, bad dimensions, unknown identifiers.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorCode::Input, what) {}
};

/// Syntax error in an expression string. `position` is a 0-based byte offset.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : InputError(what + " at position " + std::to_string(position)),
        position_(position) {}
  [[nodiscard]] std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Evaluation outside a function's domain (log of non-positive, division by zero).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::Numeric, what) {}
};

/// Newton non-convergence, singular iterates, CFL violations.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCode::Numeric, what) {}
};

}  // namespace multisym
