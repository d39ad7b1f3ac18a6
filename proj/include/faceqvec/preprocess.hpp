#pragma once

// Normalization pipeline: detect, crop with a margin, resize to a fixed square,
// then estimate landmarks and regions on the resized crop.

#include <memory>
#include <optional>
#include <string>

#include "faceqvec/face_model.hpp"
#include "faceqvec/imagery.hpp"

namespace faceqvec {

struct Annotation;

struct PreprocessConfig {
  int margin = 20;
  int out_size = 112;
  bool keep_source = true;

  void validate() const;
};

struct FaceContext {
  ImageBuffer crop;
  /// Empty when landmark estimation failed; landmark-dependent tests are then
  /// not computable.
  std::optional<LandmarkSet> landmarks;
  std::string landmark_error;
  /// Always populated. Built from the template geometry of the face box when
  /// landmarks are unavailable so photometric region tests can still run.
  RegionAtlas atlas;
  FaceBox source_box;
  int face_count = 1;
  /// Source region that was resampled into `crop`.
  Rect crop_rect;
  /// The detection box expressed in crop coordinates.
  Rect face_in_crop;
  std::shared_ptr<const ImageBuffer> source;

  int size() const noexcept { return crop.width(); }
  bool has_landmarks() const noexcept { return landmarks.has_value(); }
};

/// Box grown by `margin` on every side and clamped to the image bounds.
Rect crop_region(int image_width, int image_height, const FaceBox& box, int margin);

/// Maps a point between source pixel coordinates and crop pixel coordinates
/// using the same pixel-center convention as the bilinear resampler.
Point2 crop_to_source(const FaceContext& ctx, const Point2& p);
Point2 source_to_crop(const FaceContext& ctx, const Point2& p);

/// Runs the full pipeline. Throws Error(NoFaceDetected) when nothing is found;
/// landmark failures are recorded in the context instead of thrown.
FaceContext preprocess(const ImageBuffer& img, const PreprocessConfig& cfg, const FaceDetector& detector,
                       const LandmarkEstimator& estimator);

/// Same pipeline, with sidecar boxes and landmarks taking precedence over the
/// built-in fallbacks when present.
FaceContext preprocess(const ImageBuffer& img, const PreprocessConfig& cfg, const Annotation* annotation);

/// Builds a context from an already prepared crop (no detection step).
FaceContext context_from_crop(ImageBuffer crop, const Rect& face_in_crop, const LandmarkEstimator& estimator,
                              int face_count = 1);

}  // namespace faceqvec
