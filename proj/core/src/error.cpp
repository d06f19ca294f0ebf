#include "specktrack/error.hpp"

namespace specktrack {

ErrorClass Error::error_class() const {
  switch (code_) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidConfig:
      return ErrorClass::Usage;
    case ErrorCode::NumericFailure:
      return ErrorClass::Numeric;
    default:
      return ErrorClass::Data;
  }
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidQueryPoint: return "InvalidQueryPoint";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::EmptyLoss: return "EmptyLoss";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

void raise(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(error_code_name(code)) + ": " + message);
}

}  // namespace specktrack
