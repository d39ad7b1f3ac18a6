#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "faceqvec/face_model.hpp"
#include "helpers.hpp"

using namespace faceqvec;
using testutil::code_of;

namespace {

constexpr std::array<int, 3> kSkinRgb{200, 150, 120};
constexpr std::array<int, 3> kBlue{40, 60, 160};

void paint_ellipse(ImageBuffer& img, double cx, double cy, double rx, double ry, std::array<int, 3> c) {
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double dx = (x - cx) / rx, dy = (y - cy) / ry;
      if (dx * dx + dy * dy <= 1.0)
        for (int k = 0; k < 3; ++k) img.at(x, y, k) = static_cast<std::uint8_t>(c[static_cast<std::size_t>(k)]);
    }
}

LandmarkSet jittered(std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  LandmarkSet lm = template_landmarks(testutil::kFace, 112);
  for (Point2* p : {&lm.pupil_l, &lm.pupil_r, &lm.eye_outer_l, &lm.eye_inner_l, &lm.eye_inner_r, &lm.eye_outer_r,
                    &lm.lid_top_l, &lm.lid_bot_l, &lm.lid_top_r, &lm.lid_bot_r, &lm.brow_l, &lm.brow_r, &lm.nose_tip,
                    &lm.nose_base, &lm.mouth_corner_l, &lm.mouth_corner_r, &lm.lip_top, &lm.lip_bot, &lm.chin}) {
    p->x += d(rng);
    p->y += d(rng);
  }
  return lm;
}

}  // namespace

TEST_CASE("skin chroma detector") {
  SUBCASE("no skin pixels") {
    CHECK(code_of([] { detect_faces(testutil::solid(120, 120, 40, 60, 160), SkinChromaDetector{}); }) ==
          ErrorCode::NoFaceDetected);
  }
  SUBCASE("one ellipse") {
    ImageBuffer img = testutil::solid(200, 200, kBlue[0], kBlue[1], kBlue[2]);
    paint_ellipse(img, 100, 90, 40, 50, kSkinRgb);
    const auto boxes = detect_faces(img, SkinChromaDetector{});
    REQUIRE(boxes.size() == 1);
    const FaceBox& b = boxes[0];
    CHECK(std::abs(b.x - 60) <= 8);
    CHECK(std::abs(b.y - 40) <= 10);
    CHECK(std::abs(b.x + b.w - 141) <= 8);
    CHECK(std::abs(b.y + b.h - 141) <= 10);
  }
  SUBCASE("two equal faces") {
    ImageBuffer img = testutil::solid(300, 160, kBlue[0], kBlue[1], kBlue[2]);
    paint_ellipse(img, 75, 80, 35, 45, kSkinRgb);
    paint_ellipse(img, 225, 80, 35, 45, kSkinRgb);
    CHECK(detect_faces(img, SkinChromaDetector{}).size() == 2);
  }
  SUBCASE("scale invariance under 2x upscale") {
    ImageBuffer img = testutil::solid(160, 160, kBlue[0], kBlue[1], kBlue[2]);
    paint_ellipse(img, 70, 85, 30, 38, kSkinRgb);
    const ImageBuffer big = resize_bilinear(img, 320, 320);
    const FaceBox a = detect_faces(img, SkinChromaDetector{})[0];
    const FaceBox b = detect_faces(big, SkinChromaDetector{})[0];
    CHECK(std::abs(a.x / 160.0 - b.x / 320.0) <= 0.05);
    CHECK(std::abs(a.y / 160.0 - b.y / 320.0) <= 0.05);
    CHECK(std::abs(a.w / 160.0 - b.w / 320.0) <= 0.05);
    CHECK(std::abs(a.h / 160.0 - b.h / 320.0) <= 0.05);
  }
  SUBCASE("boxes are sorted by confidence") {
    const FixedBoxDetector det({{0, 0, 20, 20, 0.3}, {30, 30, 20, 20, 0.9}, {10, 0, 20, 20, 0.3}});
    const auto boxes = detect_faces(testutil::solid(80, 80, 0, 0, 0), det);
    REQUIRE(boxes.size() == 3);
    CHECK(boxes[0].confidence == 0.9);
    CHECK(boxes[1].x == 0);
  }
}

TEST_CASE("template landmark estimator") {
  SUBCASE("finds drawn pupils") {
    ImageBuffer crop = testutil::solid(112, 112, 120, 150, 170);
    paint_ellipse(crop, 56, 56, 40, 46, kSkinRgb);
    paint_ellipse(crop, 40, 45, 3.5, 3.5, {20, 20, 20});
    paint_ellipse(crop, 72, 45, 3.5, 3.5, {20, 20, 20});
    for (int x = 44; x < 68; ++x) crop.at(x, 80, 0) = crop.at(x, 80, 1) = crop.at(x, 80, 2) = 60;
    const LandmarkSet lm = estimate_landmarks(crop, testutil::kFace, TemplateLandmarkEstimator{});
    CHECK(distance(lm.pupil_l, {40, 45}) <= 3.0);
    CHECK(distance(lm.pupil_r, {72, 45}) <= 3.0);
    CHECK_NOTHROW(validate_landmarks(lm, 112));
  }
  SUBCASE("flat crop fails") {
    const ImageBuffer crop = testutil::solid(112, 112, 128, 128, 128);
    CHECK(code_of([&] { estimate_landmarks(crop, testutil::kFace, TemplateLandmarkEstimator{}); }) ==
          ErrorCode::LandmarkFailure);
  }
  SUBCASE("fixed estimator returns its set unchanged") {
    std::mt19937 rng(4);
    const LandmarkSet lm = jittered(rng);
    CHECK(estimate_landmarks(testutil::solid(112, 112, 1, 2, 3), testutil::kFace, FixedLandmarkEstimator(lm)) == lm);
  }
}

TEST_CASE("landmark validation") {
  LandmarkSet lm = template_landmarks(testutil::kFace, 112);
  CHECK_NOTHROW(validate_landmarks(lm, 112));
  LandmarkSet swapped = lm;
  std::swap(swapped.eye_inner_l, swapped.eye_inner_r);
  CHECK(code_of([&] { validate_landmarks(swapped, 112); }) == ErrorCode::DegenerateGeometry);
  LandmarkSet outside = lm;
  outside.nose_tip = {130, 50};
  CHECK(code_of([&] { validate_landmarks(outside, 112); }) == ErrorCode::DegenerateGeometry);
  LandmarkSet bow = lm;
  std::swap(bow.contour[1], bow.contour[4]);
  CHECK(code_of([&] { validate_landmarks(bow, 112); }) == ErrorCode::DegenerateGeometry);
}

TEST_CASE("region atlas") {
  const LandmarkSet lm = template_landmarks(testutil::kFace, 112);
  const RegionAtlas a = build_region_atlas(lm);
  for (const RegionMask* m : {&a.face, &a.background, &a.eye_zone_l, &a.eye_zone_r, &a.eye_surround, &a.forehead,
                              &a.lower_face, &a.skin}) {
    CHECK(m->width() == 112);
    CHECK(m->height() == 112);
  }
  CHECK((a.forehead & a.lower_face).empty());
  CHECK((a.eye_surround & a.eye_zones()).empty());
  CHECK((a.face & a.background).empty());
  CHECK_FALSE(a.forehead.empty());
  CHECK_FALSE(a.lower_face.empty());

  LandmarkSet bad = lm;
  bad.chin.y = bad.brow_l.y - 1;
  CHECK(code_of([&] { build_region_atlas(bad); }) == ErrorCode::DegenerateGeometry);
}

TEST_CASE("atlas containment holds for perturbed landmark sets") {
  std::mt19937 rng(8);
  for (int i = 0; i < 30; ++i) {
    const LandmarkSet lm = jittered(rng);
    const RegionAtlas a = build_region_atlas(lm);
    for (const RegionMask* m : {&a.eye_zone_l, &a.eye_zone_r, &a.forehead, &a.lower_face, &a.skin})
      CHECK((*m - a.face).empty());
    CHECK((a.face & a.background).empty());
  }
}

TEST_CASE("geometric pose") {
  const GeometricPoseEstimator est;
  const LandmarkSet lm = template_landmarks(testutil::kFace, 112);
  const PoseAngles p = estimate_pose(lm, est);
  CHECK(p.roll == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.yaw == doctest::Approx(0.0).epsilon(1e-12));

  SUBCASE("rotated pupils give the roll") {
    LandmarkSet r = lm;
    const Point2 mid = midpoint(lm.pupil_l, lm.pupil_r);
    const double a = 10.0 * std::numbers::pi / 180.0;
    auto rot = [&](Point2 q) {
      const double dx = q.x - mid.x, dy = q.y - mid.y;
      return Point2{mid.x + dx * std::cos(a) - dy * std::sin(a), mid.y + dx * std::sin(a) + dy * std::cos(a)};
    };
    r.pupil_l = rot(lm.pupil_l);
    r.pupil_r = rot(lm.pupil_r);
    CHECK(std::abs(estimate_pose(r, est).roll - 10.0) <= 0.1);
  }
  SUBCASE("nose toward the left eye gives negative yaw") {
    LandmarkSet s = lm;
    s.nose_tip.x -= 0.3 * (lm.nose_tip.x - lm.eye_outer_l.x);
    CHECK(estimate_pose(s, est).yaw < 0.0);
  }
  SUBCASE("degenerate") {
    LandmarkSet d = lm;
    d.eye_outer_l.x = d.eye_outer_r.x = d.nose_tip.x;
    CHECK(code_of([&] { estimate_pose(d, est); }) == ErrorCode::DegenerateGeometry);
  }
}

TEST_CASE("mirroring negates roll and yaw and keeps pitch") {
  std::mt19937 rng(21);
  const GeometricPoseEstimator est;
  for (int i = 0; i < 50; ++i) {
    const LandmarkSet lm = jittered(rng);
    const LandmarkSet m = mirror_landmarks(lm, 112);
    CHECK(m.eye_inner_l.x < m.eye_inner_r.x);
    const PoseAngles a = estimate_pose(lm, est), b = estimate_pose(m, est);
    CHECK(std::abs(a.roll + b.roll) <= 1e-6);
    CHECK(std::abs(a.yaw + b.yaw) <= 1e-6);
    CHECK(std::abs(a.pitch - b.pitch) <= 1e-6);
  }
}
