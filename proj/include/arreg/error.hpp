#pragma once

#include <stdexcept>
#include <string>

namespace arreg {

/// Every failure mode the library reports, one code per named condition.
enum class ErrorCode {
  FrameMismatch,
  DegenerateFeaturePoints,
  NoPath,
  InconsistentGraph,
  BehindCamera,
  NoConvergence,
  TooFewPoints,
  DegenerateConfiguration,
  SingularIntrinsics,
  NonPhysical,
  EmptyInput,
  EmptyGrid,
  ParseError,
  ValidationError,
  IoError,
};

constexpr const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::DegenerateFeaturePoints: return "DegenerateFeaturePoints";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::InconsistentGraph: return "InconsistentGraph";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::SingularIntrinsics: return "SingularIntrinsics";
    case ErrorCode::NonPhysical: return "NonPhysical";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace arreg
