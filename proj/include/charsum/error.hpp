#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace charsum {

// Domain error codes. The CLI reports these verbatim in its error object.
enum class ErrorCode {
  InvalidArgument,
  ParseError,
  NonCoprimeModuli,
  NotAUnit,
  NoGenerator,
  IndexOutOfRange,
  InvalidSplit,
  NotSquarefree,
  LogLogUndefined,
  NotPrimitive,
  NoSolution,
  NonIntegralTerm,
  PoleAtExpansionPoint,
  BadSplit,
  NormalizationViolated,
  PrincipalCharacter,
  ThresholdExceedsModulus,
  InstanceTooLarge,
  FixedPointPresent,
  OddK,
  NoValidClass,
  NoAdmissiblePair,
  UndefinedLogLog,
  MissingInput,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonCoprimeModuli: return "NonCoprimeModuli";
    case ErrorCode::NotAUnit: return "NotAUnit";
    case ErrorCode::NoGenerator: return "NoGenerator";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::NotSquarefree: return "NotSquarefree";
    case ErrorCode::LogLogUndefined: return "LogLogUndefined";
    case ErrorCode::NotPrimitive: return "NotPrimitive";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::NonIntegralTerm: return "NonIntegralTerm";
    case ErrorCode::PoleAtExpansionPoint: return "PoleAtExpansionPoint";
    case ErrorCode::BadSplit: return "BadSplit";
    case ErrorCode::NormalizationViolated: return "NormalizationViolated";
    case ErrorCode::PrincipalCharacter: return "PrincipalCharacter";
    case ErrorCode::ThresholdExceedsModulus: return "ThresholdExceedsModulus";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::FixedPointPresent: return "FixedPointPresent";
    case ErrorCode::OddK: return "OddK";
    case ErrorCode::NoValidClass: return "NoValidClass";
    case ErrorCode::NoAdmissiblePair: return "NoAdmissiblePair";
    case ErrorCode::UndefinedLogLog: return "UndefinedLogLog";
    case ErrorCode::MissingInput: return "MissingInput";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return to_string(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace charsum
