#pragma once

#include <stdexcept>
#include <string>

namespace specktrack {

enum class ErrorCode {
  BadMagic,
  Truncated,
  DimensionOverflow,
  NonFinite,
  ShapeMismatch,
  InvalidQueryPoint,
  InvalidArgument,
  InvalidConfig,
  IoFailure,
  EmptyLoss,
  SingularTransform,
  NumericFailure,
};

/// Broad failure classes; the CLI maps them to process exit codes.
enum class ErrorClass { Usage = 1, Data = 2, Numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorClass error_class() const;

 private:
  ErrorCode code_;
};

const char* error_code_name(ErrorCode code);

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace specktrack
