#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nilconj {

enum class ErrorCode {
  ParseError,
  DegenerateCenter,
  NonOrthogonalSplit,
  AsymmetricBracket,
  InsufficientSamples,
  UnsupportedCase,
  PoleError,
  NotInImage,
  NotDiagonalizable,
  CenterNotLine,
  RootLost,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. The code lets callers (and the CLI) branch on
/// the failure class without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nilconj
