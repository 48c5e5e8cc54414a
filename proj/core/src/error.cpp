#include "eegclip/error.hpp"

namespace eegclip {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kInvalidConfig: return "invalid config";
    case ErrorCode::kMalformedHeader: return "malformed header";
    case ErrorCode::kTruncatedPayload: return "truncated payload";
    case ErrorCode::kNonFiniteSample: return "non-finite sample";
    case ErrorCode::kUnknownLabel: return "unknown label";
    case ErrorCode::kBelowNyquist: return "below nyquist";
    case ErrorCode::kDuplicateTrial: return "duplicate trial";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kGraph: return "graph";
    case ErrorCode::kInsufficientData: return "insufficient data";
  }
  return "unknown";
}

}  // namespace eegclip
