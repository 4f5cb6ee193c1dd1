#pragma once

#include <stdexcept>
#include <string>

namespace morrey {

enum class ErrorCode {
  InvalidArgument,
  MixedExponentOverlap,
  ZeroFunction,
  NotInSpace,
  ParseError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MixedExponentOverlap: return "MixedExponentOverlap";
    case ErrorCode::ZeroFunction: return "ZeroFunction";
    case ErrorCode::NotInSpace: return "NotInSpace";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Single exception type for the library; `code()` distinguishes the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace morrey
