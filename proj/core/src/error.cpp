#include "cgp/error.hpp"

namespace cgp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kNonpositiveSchurComplement: return "NonpositiveSchurComplement";
    case ErrorCode::kSingletonSet: return "SingletonSet";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kInfeasibleK: return "InfeasibleK";
    case ErrorCode::kDuplicatePoints: return "DuplicatePoints";
    case ErrorCode::kQOutOfRange: return "QOutOfRange";
    case ErrorCode::kMalformedInput: return "MalformedInput";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace cgp
