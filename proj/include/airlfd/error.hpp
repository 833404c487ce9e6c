#pragma once

#include <stdexcept>
#include <string>

namespace airlfd {

// Exit-code buckets used by the CLI: config/usage = 1, data = 2, numeric = 3.
enum class ErrorCategory { Config = 1, Data = 2, Numeric = 3 };

enum class ErrorCode {
  // config / usage
  BadConfig,
  BadMode,
  UnknownKey,
  TypeError,
  // data
  MissingFile,
  BadColumn,
  ParseError,
  EmptyInput,
  DegenerateSignal,
  TooShort,
  TooFewWindows,
  EmptyBatch,
  EmptyTrajectory,
  InsufficientData,
  DegenerateScores,
  IoError,
  BadFormat,
  DimMismatch,
  ShapeMismatch,
  // numeric
  NumericFailure,
};

constexpr ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadConfig:
    case ErrorCode::BadMode:
    case ErrorCode::UnknownKey:
    case ErrorCode::TypeError:
      return ErrorCategory::Config;
    case ErrorCode::NumericFailure:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Data;
  }
}

const char* code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return airlfd::category(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace airlfd
