#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hifuse {

// Every failure the library reports carries one of these codes. The CLI maps
// them onto process exit codes (see exit_code()).
enum class ErrorCode {
  kConfig,            // unknown key, bad value type, bad flag
  kInvalidArgument,   // violated precondition (e.g. T_d >= T_f)
  kIo,                // file missing or unreadable
  kEmptyFile,
  kMalformedHeader,
  kMalformedRow,
  kNonFiniteValue,
  kNonMonotoneTime,
  kShapeMismatch,
  kDegenerate,        // zero norm, zero scale, never-reached threshold
  kSingularSystem,
  kNonFiniteLoss,
  kNonFiniteObjective,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// 0 success, 2 config error, 3 data error, 4 numerical failure.
int exit_code(ErrorCode code);

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace hifuse
