#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cgp {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNotPositiveDefinite,
  kNonpositiveSchurComplement,
  kSingletonSet,
  kTooFewPoints,
  kEmptyClass,
  kKTooLarge,
  kInfeasibleK,
  kDuplicatePoints,
  kQOutOfRange,
  kMalformedInput,
  kUnsupportedVersion,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` lets callers (the CLI in
/// particular) map failures onto exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace cgp
