#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eegclip {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidConfig,
  kMalformedHeader,
  kTruncatedPayload,
  kNonFiniteSample,
  kUnknownLabel,
  kBelowNyquist,
  kDuplicateTrial,
  kIo,
  kShapeMismatch,
  kNonFinite,
  kGraph,
  kInsufficientData,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; `code()` distinguishes failure classes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace eegclip
