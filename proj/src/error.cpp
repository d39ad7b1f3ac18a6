#include "faceqvec/error.hpp"

namespace faceqvec {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ChannelMismatch: return "ChannelMismatch";
    case ErrorCode::KernelLargerThanImage: return "KernelLargerThanImage";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::NoFaceDetected: return "NoFaceDetected";
    case ErrorCode::LandmarkFailure: return "LandmarkFailure";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::NotComputable: return "NotComputable";
    case ErrorCode::SingleClassOnly: return "SingleClassOnly";
    case ErrorCode::NoFeasibleThreshold: return "NoFeasibleThreshold";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::RegionUnavailable: return "RegionUnavailable";
    case ErrorCode::IOFailure: return "IOFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace faceqvec
