#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mwcalib {

enum class ErrorCode {
  kInvalidArgument,
  kDomain,             // incident angle outside the monotone range
  kNoRoot,             // image radius beyond gamma(eta_max)
  kOutOfFov,           // pixel cannot be backprojected
  kIllConditioned,     // attitude normal matrix is (near) singular
  kNearParallel,       // augmentation cross product vanishes
  kDegenerateArrangement,
  kNonUnitQuaternion,
  kDimensionMismatch,
  kLengthMismatch,
  kNoVisibleSamples,
  kEmptyRange,
  kFaceOutOfFov,
  kIo,
  kParse,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; the code lets callers branch
// without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mwcalib
