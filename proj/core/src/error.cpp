#include "mwcalib/error.hpp"

namespace mwcalib {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDomain: return "domain error";
    case ErrorCode::kNoRoot: return "no root";
    case ErrorCode::kOutOfFov: return "out of field of view";
    case ErrorCode::kIllConditioned: return "ill-conditioned";
    case ErrorCode::kNearParallel: return "near-parallel points";
    case ErrorCode::kDegenerateArrangement: return "degenerate arrangement";
    case ErrorCode::kNonUnitQuaternion: return "non-unit quaternion";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kLengthMismatch: return "length mismatch";
    case ErrorCode::kNoVisibleSamples: return "no mutually visible samples";
    case ErrorCode::kEmptyRange: return "empty range";
    case ErrorCode::kFaceOutOfFov: return "face out of field of view";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kParse: return "parse error";
  }
  return "unknown error";
}

}  // namespace mwcalib
