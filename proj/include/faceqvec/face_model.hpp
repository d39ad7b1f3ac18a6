#pragma once

// Face detection, landmark estimation and pose estimation behind pluggable
// interfaces, with classical fallbacks, plus the named face regions every
// quality test reads from.

#include <optional>
#include <vector>

#include "faceqvec/imagery.hpp"

namespace faceqvec {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

double distance(const Point2& a, const Point2& b) noexcept;
Point2 midpoint(const Point2& a, const Point2& b) noexcept;

/// Detection in source-image pixel coordinates.
struct FaceBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  double confidence = 1.0;
  bool operator==(const FaceBox&) const = default;
};

/// Named keypoints in crop coordinates. "_l" is always image-left.
/// lip_top / lip_bot are the inner lip midpoints, so they coincide for a
/// closed mouth.
struct LandmarkSet {
  Point2 pupil_l, pupil_r;
  Point2 eye_outer_l, eye_inner_l, eye_inner_r, eye_outer_r;
  Point2 lid_top_l, lid_bot_l, lid_top_r, lid_bot_r;
  Point2 brow_l, brow_r;
  Point2 nose_tip, nose_base;
  Point2 mouth_corner_l, mouth_corner_r;
  Point2 lip_top, lip_bot;
  Point2 chin;
  std::vector<Point2> contour;

  bool operator==(const LandmarkSet&) const = default;
};

/// Checks the LandmarkSet invariants for a crop of the given size; throws
/// Error(DegenerateGeometry) describing the first violation.
void validate_landmarks(const LandmarkSet& lm, int crop_size);

/// Horizontal mirror about the crop's vertical center line; left/right names
/// are swapped so image-left stays "_l".
LandmarkSet mirror_landmarks(const LandmarkSet& lm, int crop_size);

/// Canonical frontal geometry for a face occupying `face` within the crop.
LandmarkSet template_landmarks(const Rect& face, int crop_size);

bool polygon_is_simple(const std::vector<Point2>& poly);
RegionMask fill_polygon(int width, int height, const std::vector<Point2>& poly);

struct RegionAtlas {
  RegionMask face;
  RegionMask background;
  RegionMask eye_zone_l;
  RegionMask eye_zone_r;
  RegionMask eye_surround;
  RegionMask forehead;
  RegionMask lower_face;
  RegionMask skin;
  /// Elliptical eye openings through the corners and lids.
  RegionMask eye_openings;
  RegionMask mouth_zone;

  RegionMask eye_zones() const { return eye_zone_l | eye_zone_r; }
};

struct AtlasParams {
  double eye_zone_expand = 0.25;      // per side, fraction of the corner/lid box
  double eye_surround_scale = 1.6;    // surround box = zone box scaled about its center
  int background_dilation = 4;
  double forehead_fraction = 0.35;    // of chin.y - brow.y
};

/// Builds every region from landmarks alone. `skin` is the face minus the
/// eye and mouth zones; it does not depend on pixel chroma.
RegionAtlas build_region_atlas(const LandmarkSet& lm, int crop_size = 112, const AtlasParams& params = {});

struct PoseAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

// ---- pluggable components ------------------------------------------------------

class FaceDetector {
 public:
  virtual ~FaceDetector() = default;
  /// Returns candidate boxes; callers sort and validate.
  virtual std::vector<FaceBox> detect(const ImageBuffer& img) const = 0;
};

/// Fallback detector: skin-chroma connected components passing an aspect-ratio
/// gate (0.6-1.4) and an area gate (>= 1% of the image).
class SkinChromaDetector final : public FaceDetector {
 public:
  std::vector<FaceBox> detect(const ImageBuffer& img) const override;
};

/// Serves externally supplied boxes, e.g. from an annotation sidecar.
class FixedBoxDetector final : public FaceDetector {
 public:
  explicit FixedBoxDetector(std::vector<FaceBox> boxes) : boxes_(std::move(boxes)) {}
  std::vector<FaceBox> detect(const ImageBuffer& img) const override;

 private:
  std::vector<FaceBox> boxes_;
};

class LandmarkEstimator {
 public:
  virtual ~LandmarkEstimator() = default;
  /// `face` is the detected box mapped into crop coordinates.
  virtual LandmarkSet estimate(const ImageBuffer& crop, const Rect& face) const = 0;
};

/// Fallback estimator: template geometry refined by dark-pupil valley search in
/// the canonical eye band and a gradient search for the mouth line.
class TemplateLandmarkEstimator final : public LandmarkEstimator {
 public:
  LandmarkSet estimate(const ImageBuffer& crop, const Rect& face) const override;
};

/// Returns a fixed landmark set, e.g. one read from an annotation sidecar.
class FixedLandmarkEstimator final : public LandmarkEstimator {
 public:
  explicit FixedLandmarkEstimator(LandmarkSet lm) : lm_(std::move(lm)) {}
  LandmarkSet estimate(const ImageBuffer&, const Rect&) const override { return lm_; }

 private:
  LandmarkSet lm_;
};

class PoseEstimator {
 public:
  virtual ~PoseEstimator() = default;
  virtual PoseAngles estimate(const LandmarkSet& lm) const = 0;
};

/// Coarse landmark-geometry proxy; only sign and monotonicity are meaningful
/// for yaw and pitch.
class GeometricPoseEstimator final : public PoseEstimator {
 public:
  explicit GeometricPoseEstimator(double canonical_pitch_ratio = 0.85) : r0_(canonical_pitch_ratio) {}
  PoseAngles estimate(const LandmarkSet& lm) const override;

 private:
  double r0_;
};

// ---- operations ------------------------------------------------------------------

/// Boxes sorted by confidence descending (ties: top-most, then left-most).
/// Throws Error(NoFaceDetected) when the detector yields nothing usable.
std::vector<FaceBox> detect_faces(const ImageBuffer& img, const FaceDetector& detector);

LandmarkSet estimate_landmarks(const ImageBuffer& crop, const Rect& face, const LandmarkEstimator& estimator);

PoseAngles estimate_pose(const LandmarkSet& lm, const PoseEstimator& estimator);

}  // namespace faceqvec
