#pragma once

#include <stdexcept>
#include <string>

namespace specflow {

enum class ErrorCode {
  InvalidArgument,
  TooFewPoints,
  SelfIntersecting,
  DegenerateSegment,
  StepTooLarge,
  SelfIntersectionDuringFlow,
  CutoffTooLarge,
  NoConvergence,
  NotConnected,
  ConvergenceFailure,
  BeyondCompleteness,
  WindowTooSmall,
  TailDominates,
  EmptyWindow,
  NonpositiveZ,
  PoleRegularityViolated,
  PositivityLost,
  ToleranceFailure,
  AxisCrossing,
  UnknownKey,
  TypeMismatch,
  MissingRequired,
  Io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::SelfIntersecting: return "SelfIntersecting";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::SelfIntersectionDuringFlow: return "SelfIntersectionDuringFlow";
    case ErrorCode::CutoffTooLarge: return "CutoffTooLarge";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::BeyondCompleteness: return "BeyondCompleteness";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::TailDominates: return "TailDominates";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::NonpositiveZ: return "NonpositiveZ";
    case ErrorCode::PoleRegularityViolated: return "PoleRegularityViolated";
    case ErrorCode::PositivityLost: return "PositivityLost";
    case ErrorCode::ToleranceFailure: return "ToleranceFailure";
    case ErrorCode::AxisCrossing: return "AxisCrossing";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::MissingRequired: return "MissingRequired";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Configuration-class errors map to CLI exit code 2, everything else to 3.
inline bool is_config_error(ErrorCode code) {
  return code == ErrorCode::UnknownKey || code == ErrorCode::TypeMismatch ||
         code == ErrorCode::MissingRequired || code == ErrorCode::Io ||
         code == ErrorCode::InvalidArgument;
}

}  // namespace specflow
