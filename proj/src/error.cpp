#include "airlfd/error.hpp"

namespace airlfd {

const char* code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::BadMode: return "BadMode";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::TypeError: return "TypeError";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::BadColumn: return "BadColumn";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateSignal: return "DegenerateSignal";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::TooFewWindows: return "TooFewWindows";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateScores: return "DegenerateScores";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NumericFailure: return "NumericFailure";
  }
  return "Error";
}

}  // namespace airlfd
