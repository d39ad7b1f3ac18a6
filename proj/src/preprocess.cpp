#include "faceqvec/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "faceqvec/error.hpp"
#include "faceqvec/sidecar.hpp"

namespace faceqvec {

void PreprocessConfig::validate() const {
  if (margin < 0) fail(ErrorCode::InvalidArgument, "margin must be >= 0");
  if (out_size < 32) fail(ErrorCode::InvalidArgument, "out_size must be >= 32");
}

Rect crop_region(int image_width, int image_height, const FaceBox& box, int margin) {
  const int x0 = std::clamp(box.x - margin, 0, image_width);
  const int y0 = std::clamp(box.y - margin, 0, image_height);
  const int x1 = std::clamp(box.x + box.w + margin, 0, image_width);
  const int y1 = std::clamp(box.y + box.h + margin, 0, image_height);
  return {x0, y0, x1 - x0, y1 - y0};
}

Point2 crop_to_source(const FaceContext& ctx, const Point2& p) {
  const double sx = static_cast<double>(ctx.crop_rect.width) / ctx.size();
  const double sy = static_cast<double>(ctx.crop_rect.height) / ctx.size();
  return {ctx.crop_rect.x + (p.x + 0.5) * sx - 0.5, ctx.crop_rect.y + (p.y + 0.5) * sy - 0.5};
}

Point2 source_to_crop(const FaceContext& ctx, const Point2& p) {
  const double sx = static_cast<double>(ctx.size()) / ctx.crop_rect.width;
  const double sy = static_cast<double>(ctx.size()) / ctx.crop_rect.height;
  return {(p.x - ctx.crop_rect.x + 0.5) * sx - 0.5, (p.y - ctx.crop_rect.y + 0.5) * sy - 0.5};
}

namespace {

void attach_landmarks(FaceContext& ctx, const LandmarkEstimator& estimator) {
  const int n = ctx.size();
  try {
    LandmarkSet lm = estimate_landmarks(ctx.crop, ctx.face_in_crop, estimator);
    validate_landmarks(lm, n);
    ctx.atlas = build_region_atlas(lm, n);
    ctx.landmarks = std::move(lm);
    return;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::LandmarkFailure && e.code() != ErrorCode::DegenerateGeometry) throw;
    ctx.landmark_error = e.what();
  }
  ctx.landmarks.reset();
  ctx.atlas = build_region_atlas(template_landmarks(ctx.face_in_crop, n), n);
}

}  // namespace

FaceContext preprocess(const ImageBuffer& img, const PreprocessConfig& cfg, const FaceDetector& detector,
                       const LandmarkEstimator& estimator) {
  cfg.validate();
  if (img.channels() != 3) fail(ErrorCode::ChannelMismatch, "preprocess needs a 3-channel image");
  const std::vector<FaceBox> boxes = detect_faces(img, detector);

  FaceContext ctx;
  ctx.source_box = boxes.front();
  ctx.face_count = static_cast<int>(boxes.size());
  ctx.crop_rect = crop_region(img.width(), img.height(), ctx.source_box, cfg.margin);
  ctx.crop = resize_bilinear(crop(img, ctx.crop_rect), cfg.out_size, cfg.out_size);
  if (cfg.keep_source) ctx.source = std::make_shared<const ImageBuffer>(img);

  const double sx = static_cast<double>(cfg.out_size) / ctx.crop_rect.width;
  const double sy = static_cast<double>(cfg.out_size) / ctx.crop_rect.height;
  const int fx0 = static_cast<int>(std::lround((ctx.source_box.x - ctx.crop_rect.x) * sx));
  const int fy0 = static_cast<int>(std::lround((ctx.source_box.y - ctx.crop_rect.y) * sy));
  const int fx1 = static_cast<int>(std::lround((ctx.source_box.x + ctx.source_box.w - ctx.crop_rect.x) * sx));
  const int fy1 = static_cast<int>(std::lround((ctx.source_box.y + ctx.source_box.h - ctx.crop_rect.y) * sy));
  ctx.face_in_crop = {std::clamp(fx0, 0, cfg.out_size - 1), std::clamp(fy0, 0, cfg.out_size - 1), 0, 0};
  ctx.face_in_crop.width = std::clamp(fx1, ctx.face_in_crop.x + 1, cfg.out_size) - ctx.face_in_crop.x;
  ctx.face_in_crop.height = std::clamp(fy1, ctx.face_in_crop.y + 1, cfg.out_size) - ctx.face_in_crop.y;

  attach_landmarks(ctx, estimator);
  return ctx;
}

FaceContext preprocess(const ImageBuffer& img, const PreprocessConfig& cfg, const Annotation* annotation) {
  const SkinChromaDetector skin_detector;
  const TemplateLandmarkEstimator template_estimator;
  std::optional<FixedBoxDetector> fixed_boxes;
  std::optional<FixedLandmarkEstimator> fixed_landmarks;
  if (annotation && !annotation->boxes.empty()) fixed_boxes.emplace(annotation->boxes);
  if (annotation && annotation->landmarks) fixed_landmarks.emplace(*annotation->landmarks);
  const FaceDetector& detector = fixed_boxes ? static_cast<const FaceDetector&>(*fixed_boxes) : skin_detector;
  const LandmarkEstimator& estimator =
      fixed_landmarks ? static_cast<const LandmarkEstimator&>(*fixed_landmarks) : template_estimator;
  return preprocess(img, cfg, detector, estimator);
}

FaceContext context_from_crop(ImageBuffer crop_img, const Rect& face_in_crop, const LandmarkEstimator& estimator,
                              int face_count) {
  if (crop_img.channels() != 3 || crop_img.width() != crop_img.height()) {
    fail(ErrorCode::InvalidArgument, "context crops must be square 3-channel images");
  }
  FaceContext ctx;
  ctx.crop_rect = {0, 0, crop_img.width(), crop_img.height()};
  ctx.crop = std::move(crop_img);
  ctx.face_in_crop = face_in_crop;
  ctx.source_box = {face_in_crop.x, face_in_crop.y, face_in_crop.width, face_in_crop.height, 1.0};
  ctx.face_count = std::max(1, face_count);
  attach_landmarks(ctx, estimator);
  return ctx;
}

}  // namespace faceqvec
