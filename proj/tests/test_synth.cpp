#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "faceqvec/corpus.hpp"
#include "faceqvec/synth.hpp"
#include "helpers.hpp"

using namespace faceqvec;
using testutil::code_of;

namespace {

constexpr DegradationKind kAllKinds[] = {
    DegradationKind::GaussianBlur,      DegradationKind::WhiteNoise,       DegradationKind::Pixelate,
    DegradationKind::Darken,            DegradationKind::Brighten,         DegradationKind::ContrastCompress,
    DegradationKind::BackgroundClutter, DegradationKind::BackgroundShadow, DegradationKind::FaceShadow,
    DegradationKind::SpecularBlob,      DegradationKind::RedEye,           DegradationKind::OcclusionPatch,
    DegradationKind::FrameLines,        DegradationKind::TintSkin,
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<BaseImage> portraits(int n) {
  std::vector<BaseImage> out;
  for (int i = 0; i < n; ++i) {
    Portrait p = render_portrait(static_cast<std::uint64_t>(100 + i));
    out.push_back({"base" + std::to_string(i), std::move(p.image), std::move(p.annotation)});
  }
  return out;
}

}  // namespace

TEST_CASE("kind names round-trip") {
  for (DegradationKind k : kAllKinds) CHECK(degradation_kind_from_string(to_string(k)) == k);
  CHECK(code_of([] { degradation_kind_from_string("sepia"); }) == ErrorCode::SchemaMismatch);
}

TEST_CASE("severity zero is the identity for every kind") {
  const Portrait p = render_portrait(1);
  for (DegradationKind k : kAllKinds) {
    const SynthSample s = apply(p.image, {k, 0.0, 5}, &p.annotation);
    CHECK_MESSAGE(s.image == p.image, to_string(k));
    for (int id : affected_tests({k, 0.0, 5})) CHECK(s.labels[static_cast<std::size_t>(id - 1)] == 1);
  }
}

TEST_CASE("implied labels") {
  const SynthSample s = apply(render_portrait(2).image, {DegradationKind::GaussianBlur, 3.0, 1});
  for (int id = 1; id <= 25; ++id) {
    if (id == 1)
      CHECK(s.labels[0] == 0);
    else
      CHECK_FALSE(s.labels[static_cast<std::size_t>(id - 1)].has_value());
  }
  // below the defect threshold the oracle abstains
  const auto mid = implied_labels({DegradationKind::GaussianBlur, 1.0, 1});
  CHECK_FALSE(mid[0].has_value());
  DegradationSpec lower{DegradationKind::OcclusionPatch, 0.5, 1};
  lower.region = PatchRegion::LowerFace;
  CHECK(affected_tests(lower) == std::vector<int>{21});
  CHECK(affected_tests({DegradationKind::FrameLines, 1.0, 0}) == std::vector<int>{18, 19});
}

TEST_CASE("deterministic for a fixed seed") {
  const Portrait p = render_portrait(4);
  for (DegradationKind k : kAllKinds) {
    const double sev = standard_ladder(k).back();
    const SynthSample a = apply(p.image, {k, sev, 9}, &p.annotation);
    const SynthSample b = apply(p.image, {k, sev, 9}, &p.annotation);
    CHECK_MESSAGE(a.image == b.image, to_string(k));
    CHECK_MESSAGE(!(a.image == p.image), to_string(k));
  }
  CHECK(render_portrait(8).image == render_portrait(8).image);
  CHECK(splitmix64(1) == splitmix64(1));
  CHECK(hash_counter(1, 2, 3) != hash_counter(1, 3, 2));
  for (int i = 0; i < 100; ++i) {
    const double u = hash_uniform(3, static_cast<std::uint64_t>(i));
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("region-targeted kinds stay inside their region") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Portrait p = render_portrait(seed);
    for (DegradationKind k : kAllKinds) {
      if (!is_region_targeted(k)) continue;
      for (PatchRegion region : {PatchRegion::Forehead, PatchRegion::LowerFace}) {
        if (k != DegradationKind::OcclusionPatch && region == PatchRegion::LowerFace) continue;
        DegradationSpec spec{k, standard_ladder(k).back(), seed};
        spec.region = region;
        const RegionMask target = target_region(p.image, spec, &p.annotation);
        const SynthSample s = apply(p.image, spec, &p.annotation);
        std::size_t outside = 0;
        for (int y = 0; y < p.image.height(); ++y)
          for (int x = 0; x < p.image.width(); ++x)
            if (!target.test(x, y))
              for (int c = 0; c < 3; ++c) outside += s.image.at(x, y, c) != p.image.at(x, y, c);
        CHECK_MESSAGE(outside == 0, to_string(k));
      }
    }
  }
}

TEST_CASE("red eye plants strongly red pupils") {
  const Portrait p = render_portrait(6);
  const SynthSample s = apply(p.image, {DegradationKind::RedEye, 1.0, 0}, &p.annotation);
  CHECK(s.labels[12] == 0);
  const FaceContext ctx = preprocess(p.image, {}, &p.annotation);
  for (const Point2& pupil : {ctx.landmarks->pupil_l, ctx.landmarks->pupil_r}) {
    const Point2 src = crop_to_source(ctx, pupil);
    const int x = static_cast<int>(std::lround(src.x)), y = static_cast<int>(std::lround(src.y));
    CHECK(s.image.at(x, y, 0) - std::max(s.image.at(x, y, 1), s.image.at(x, y, 2)) > 50);
  }
  const FaceContext red = preprocess(s.image, {}, &p.annotation);
  CHECK(red_eye_score(red, {}).value == 0.0);
}

TEST_CASE("region-targeted kinds need face geometry") {
  const ImageBuffer flat = testutil::solid(120, 120, 128, 128, 128);
  CHECK(code_of([&] { apply(flat, {DegradationKind::RedEye, 1.0, 0}); }) == ErrorCode::RegionUnavailable);
  CHECK_NOTHROW(apply(flat, {DegradationKind::GaussianBlur, 1.0, 0}));
  CHECK(code_of([&] { apply(flat, {DegradationKind::GaussianBlur, -1.0, 0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("background defects leave face tests alone") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Portrait p = render_portrait(seed);
    const FaceContext clean = preprocess(p.image, {}, &p.annotation);
    for (DegradationKind k : {DegradationKind::BackgroundShadow, DegradationKind::BackgroundClutter}) {
      const SynthSample s = apply(p.image, {k, standard_ladder(k).back(), seed}, &p.annotation);
      const FaceContext dirty = preprocess(s.image, {}, &p.annotation);
      const ScoringConfig cfg;
      CHECK(std::abs(blur_score(dirty, cfg).value - blur_score(clean, cfg).value) <= 0.02);
      CHECK(std::abs(luminance_score(dirty, cfg).value - luminance_score(clean, cfg).value) <= 0.02);
      CHECK(std::abs(contrast_score(dirty, cfg).value - contrast_score(clean, cfg).value) <= 0.02);
      CHECK(std::abs(overexposure_score(dirty, RegionKey::Skin, cfg).value -
                     overexposure_score(clean, RegionKey::Skin, cfg).value) <= 0.02);
      CHECK(std::abs(shadow_score(dirty, RegionKey::Face, cfg).value - shadow_score(clean, RegionKey::Face, cfg).value) <=
            0.02);
    }
  }
}

TEST_CASE("plans") {
  const auto plan = parse_plan(R"([{"kind":"gaussian_blur","severities":[0,2],"count":3},
                                  {"kind":"occlusion_patch","severities":[0.5],"count":1,"region":"lower_face","color":[1,2,3]}])");
  REQUIRE(plan.size() == 2);
  CHECK(plan[0].count == 3);
  CHECK(plan[1].proto.region == PatchRegion::LowerFace);
  CHECK(plan[1].proto.color == std::array<int, 3>{1, 2, 3});
  CHECK(parse_plan(plan_to_json(plan)).size() == 2);
  CHECK(parse_plan(plan_to_json(plan))[1].severities == plan[1].severities);

  for (const char* bad : {R"({"kind":"gaussian_blur"})", R"([{"kind":"gaussian_blur","severities":[1],"count":1,"x":1}])",
                          R"([{"kind":"gaussian_blur","severities":[-1],"count":1}])",
                          R"([{"kind":"gaussian_blur","severities":[1],"count":0}])",
                          R"([{"kind":"gaussian_blur","severities":[1],"count":1,"region":"forehead"}])",
                          R"([{"kind":"nope","severities":[1],"count":1}])", "not json"})
    CHECK_MESSAGE(code_of([&] { parse_plan(bad); }) == ErrorCode::SchemaMismatch, bad);

  const auto def = default_plan(10);
  CHECK(def.size() == 15);
  for (const auto& item : def) CHECK(item.severities.size() == 5);
}

TEST_CASE("build_corpus") {
  const testutil::TempDir a("corpus_a"), b("corpus_b");
  const auto bases = portraits(5);
  const auto plan = parse_plan(R"([{"kind":"gaussian_blur","severities":[0,2,3],"count":5},
                                  {"kind":"white_noise","severities":[10,20],"count":5},
                                  {"kind":"darken","severities":[1,2],"count":5}])");
  const CorpusSummary s = build_corpus(bases, plan, 7, a.path);
  CHECK(s.degraded == 30);
  CHECK(s.clean == 5);

  const LabelTable labels = load_labels(a.path / "labels.csv");
  CHECK(labels.size() == 35);
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(a.path / "images"))
    if (e.path().extension() == ".png") ++files;
  CHECK(files == 35);
  for (const LabelRow& row : labels) {
    CHECK(std::filesystem::exists(a.path / row.image));
    if (row.image.find("clean_") != std::string::npos) {
      CHECK(row.labels[0] == 1);
      CHECK(row.labels[23] == 1);
      CHECK(row.labels[4] == 1);
      CHECK_FALSE(row.labels[12].has_value());
    }
  }
  CHECK(std::is_sorted(labels.begin(), labels.end(), [](const LabelRow& x, const LabelRow& y) { return x.image < y.image; }));
  CHECK(parse_labels(format_labels(labels)).size() == labels.size());

  build_corpus(bases, plan, 7, b.path);
  CHECK(slurp(a.path / "labels.csv") == slurp(b.path / "labels.csv"));
  for (const LabelRow& row : labels) CHECK(slurp(a.path / row.image) == slurp(b.path / row.image));
}

TEST_CASE("base image loading") {
  const testutil::TempDir empty("empty");
  CHECK(code_of([&] { load_base_images(empty.path); }) == ErrorCode::IOFailure);
  CHECK(code_of([&] { load_base_images(empty.path / "missing"); }) == ErrorCode::IOFailure);
  CHECK(code_of([] { build_corpus({}, default_plan(1), 0, std::filesystem::temp_directory_path()); }) ==
        ErrorCode::IOFailure);
}
