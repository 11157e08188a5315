#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ogda {

enum class ErrorCode {
  kZeroMatrix,
  kNonPositiveValue,
  kWindowTooSmall,
  kDimensionMismatch,
  kInfeasibleSet,
  kTooManyVertices,
  kUnsupported,
  kDomainError,
  kInfeasiblePoint,
  kUnsupportedNormPair,
  kNumericalOverflow,
  kConfigMismatch,
  kLpFailure,
  kNonPositiveXi,
  kDegenerateSample,
  kMissingSecondary,
  kAtEquilibrium,
  kTooFewPoints,
  kInvalidBeta,
  kPreconditionViolated,
  kParseError,
  kValidationError,
  kIoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroMatrix: return "ZeroMatrix";
    case ErrorCode::kNonPositiveValue: return "NonPositiveValue";
    case ErrorCode::kWindowTooSmall: return "WindowTooSmall";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInfeasibleSet: return "InfeasibleSet";
    case ErrorCode::kTooManyVertices: return "TooManyVertices";
    case ErrorCode::kUnsupported: return "Unsupported";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kInfeasiblePoint: return "InfeasiblePoint";
    case ErrorCode::kUnsupportedNormPair: return "UnsupportedNormPair";
    case ErrorCode::kNumericalOverflow: return "NumericalOverflow";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kLpFailure: return "LpFailure";
    case ErrorCode::kNonPositiveXi: return "NonPositiveXi";
    case ErrorCode::kDegenerateSample: return "DegenerateSample";
    case ErrorCode::kMissingSecondary: return "MissingSecondary";
    case ErrorCode::kAtEquilibrium: return "AtEquilibrium";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kInvalidBeta: return "InvalidBeta";
    case ErrorCode::kPreconditionViolated: return "PreconditionViolated";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The text without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace ogda
