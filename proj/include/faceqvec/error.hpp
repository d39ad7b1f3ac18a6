#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace faceqvec {

enum class ErrorCode {
  InvalidArgument,
  ChannelMismatch,
  KernelLargerThanImage,
  ImageTooSmall,
  EmptyRegion,
  EmptyHistogram,
  TooFewSamples,
  NoFaceDetected,
  LandmarkFailure,
  DegenerateGeometry,
  NotComputable,
  SingleClassOnly,
  NoFeasibleThreshold,
  EmptyCorpus,
  SchemaMismatch,
  RegionUnavailable,
  IOFailure,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map it onto a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace faceqvec
