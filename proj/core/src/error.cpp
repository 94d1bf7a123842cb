#include "hifuse/error.hpp"

namespace hifuse {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kEmptyFile: return "empty-file";
    case ErrorCode::kMalformedHeader: return "malformed-header";
    case ErrorCode::kMalformedRow: return "malformed-row";
    case ErrorCode::kNonFiniteValue: return "non-finite-value";
    case ErrorCode::kNonMonotoneTime: return "non-monotone-time";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kSingularSystem: return "singular-system";
    case ErrorCode::kNonFiniteLoss: return "non-finite-loss";
    case ErrorCode::kNonFiniteObjective: return "non-finite-objective";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
      return 2;
    case ErrorCode::kIo:
    case ErrorCode::kEmptyFile:
    case ErrorCode::kMalformedHeader:
    case ErrorCode::kMalformedRow:
    case ErrorCode::kNonFiniteValue:
    case ErrorCode::kNonMonotoneTime:
    case ErrorCode::kShapeMismatch:
      return 3;
    case ErrorCode::kDegenerate:
    case ErrorCode::kSingularSystem:
    case ErrorCode::kNonFiniteLoss:
    case ErrorCode::kNonFiniteObjective:
      return 4;
  }
  return 1;
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace hifuse
