#pragma once

#include <stdexcept>
#include <string>

namespace noisecal {

enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kIo,
  kUnsupportedFormat,
  kEmptyInput,
  kFitFailure,
  kOutOfRange,
  kBracketNotFound,
  kCorruptData,
};

/// Short stable identifier for an error code, used in `level:code:message`
/// diagnostics.
const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace noisecal
