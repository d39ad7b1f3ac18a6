#include "faceqvec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

#include "faceqvec/error.hpp"
#include "faceqvec/image_io.hpp"

namespace faceqvec {

using nlohmann::json;

// ---- randomness --------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_counter(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept {
  return splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b) ^ c);
}

double hash_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept {
  return static_cast<double>(hash_counter(seed, a, b, c) >> 11) * 0x1.0p-53;
}

double hash_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept {
  const double u1 = 1.0 - hash_uniform(seed, a, b, c);  // (0,1]
  const double u2 = hash_uniform(splitmix64(seed ^ 0x5bd1e995ULL), a, b, c);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// ---- kinds ---------------------------------------------------------------------------

namespace {

struct KindInfo {
  DegradationKind kind;
  const char* name;
  double defect;
  std::array<double, 5> ladder;
};

const std::array<KindInfo, 14>& kind_table() {
  static const std::array<KindInfo, 14> t{{
      {DegradationKind::GaussianBlur, "gaussian_blur", 2.0, {0, 1, 2, 3, 5}},
      {DegradationKind::WhiteNoise, "white_noise", 10.0, {0, 5, 10, 20, 40}},
      {DegradationKind::Pixelate, "pixelate", 6.0, {0, 4, 6, 10, 16}},
      {DegradationKind::Darken, "darken", 1.0, {0, 0.5, 1, 2, 3}},
      {DegradationKind::Brighten, "brighten", 1.0, {0, 0.5, 1, 2, 3}},
      {DegradationKind::ContrastCompress, "contrast_compress", 0.5, {0, 0.2, 0.4, 0.6, 0.8}},
      {DegradationKind::BackgroundClutter, "background_clutter", 0.2, {0, 0.1, 0.2, 0.3, 0.4}},
      {DegradationKind::BackgroundShadow, "background_shadow", 0.2, {0, 0.1, 0.2, 0.3, 0.4}},
      {DegradationKind::FaceShadow, "face_shadow", 0.2, {0, 0.1, 0.2, 0.3, 0.4}},
      {DegradationKind::SpecularBlob, "specular_blob", 0.05, {0, 0.025, 0.05, 0.075, 0.1}},
      {DegradationKind::RedEye, "red_eye", 0.5, {0, 0.25, 0.5, 0.75, 1.0}},
      {DegradationKind::OcclusionPatch, "occlusion_patch", 0.3, {0, 0.15, 0.3, 0.5, 0.8}},
      {DegradationKind::FrameLines, "frame_lines", 2.0, {0, 1, 2, 3, 4}},
      {DegradationKind::TintSkin, "tint_skin", 30.0, {0, 10, 20, 30, 40}},
  }};
  return t;
}

const KindInfo& info(DegradationKind k) {
  for (const auto& i : kind_table())
    if (i.kind == k) return i;
  fail(ErrorCode::InvalidArgument, "unknown degradation kind");
}

std::array<int, 3> default_patch_color(PatchRegion r) {
  return r == PatchRegion::Forehead ? std::array<int, 3>{40, 60, 150} : std::array<int, 3>{150, 60, 140};
}

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

std::string_view to_string(DegradationKind k) { return info(k).name; }

DegradationKind degradation_kind_from_string(std::string_view s) {
  for (const auto& i : kind_table())
    if (s == i.name) return i.kind;
  fail(ErrorCode::SchemaMismatch, "unknown degradation kind: " + std::string(s));
}

std::vector<int> affected_tests(const DegradationSpec& spec) {
  switch (spec.kind) {
    case DegradationKind::GaussianBlur: return {1};
    case DegradationKind::WhiteNoise: return {24};
    case DegradationKind::Pixelate: return {7};
    case DegradationKind::Darken:
    case DegradationKind::Brighten: return {5};
    case DegradationKind::ContrastCompress: return {6};
    case DegradationKind::BackgroundClutter: return {10};
    case DegradationKind::BackgroundShadow: return {14};
    case DegradationKind::FaceShadow: return {15};
    case DegradationKind::SpecularBlob: return {12};
    case DegradationKind::RedEye: return {13};
    case DegradationKind::OcclusionPatch: return {spec.region == PatchRegion::Forehead ? 20 : 21};
    case DegradationKind::FrameLines: return {18, 19};
    case DegradationKind::TintSkin: return {4};
  }
  return {};
}

double defect_threshold(const DegradationSpec& spec) { return info(spec.kind).defect; }

bool is_region_targeted(DegradationKind k) {
  switch (k) {
    case DegradationKind::BackgroundClutter:
    case DegradationKind::BackgroundShadow:
    case DegradationKind::FaceShadow:
    case DegradationKind::SpecularBlob:
    case DegradationKind::RedEye:
    case DegradationKind::OcclusionPatch:
    case DegradationKind::FrameLines:
    case DegradationKind::TintSkin: return true;
    default: return false;
  }
}

std::array<std::optional<int>, kTestCount> implied_labels(const DegradationSpec& spec) {
  std::array<std::optional<int>, kTestCount> labels{};
  std::optional<int> v;
  if (spec.severity == 0.0)
    v = 1;
  else if (spec.severity >= defect_threshold(spec))
    v = 0;
  for (int id : affected_tests(spec)) labels[id - 1] = v;
  return labels;
}

std::vector<double> standard_ladder(DegradationKind k) {
  const auto& l = info(k).ladder;
  return {l.begin(), l.end()};
}

// ---- geometry ------------------------------------------------------------------------

namespace {

struct Geometry {
  FaceContext ctx;
  int width = 0;
  int height = 0;

  // Source pixels whose crop position falls inside the crop-space mask.
  RegionMask to_source(const RegionMask& crop_mask) const {
    RegionMask out(width, height);
    const Rect& r = ctx.crop_rect;
    const int n = ctx.size();
    for (int y = r.y; y < r.bottom(); ++y) {
      for (int x = r.x; x < r.right(); ++x) {
        const Point2 p = source_to_crop(ctx, {double(x), double(y)});
        const int cx = std::clamp(static_cast<int>(std::lround(p.x)), 0, n - 1);
        const int cy = std::clamp(static_cast<int>(std::lround(p.y)), 0, n - 1);
        if (crop_mask.test(cx, cy)) out.set(x, y);
      }
    }
    return out;
  }
  Point2 src(const Point2& p) const { return crop_to_source(ctx, p); }
  double scale() const { return static_cast<double>(ctx.crop_rect.width) / ctx.size(); }
};

Geometry geometry(const ImageBuffer& img, const Annotation* annotation, const PreprocessConfig& cfg, bool need_landmarks) {
  PreprocessConfig c = cfg;
  c.keep_source = false;
  Geometry g;
  g.width = img.width();
  g.height = img.height();
  try {
    g.ctx = preprocess(img, c, annotation);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoFaceDetected) fail(ErrorCode::RegionUnavailable, e.what());
    throw;
  }
  if (need_landmarks && !g.ctx.has_landmarks())
    fail(ErrorCode::RegionUnavailable, "face regions unavailable: " + g.ctx.landmark_error);
  return g;
}

RegionMask crop_target(const FaceContext& ctx, const DegradationSpec& spec) {
  const RegionAtlas& a = ctx.atlas;
  switch (spec.kind) {
    case DegradationKind::BackgroundClutter:
    case DegradationKind::BackgroundShadow: return a.background;
    case DegradationKind::FaceShadow: return a.face;
    case DegradationKind::SpecularBlob:
    case DegradationKind::TintSkin: return a.skin;
    case DegradationKind::RedEye: return a.eye_zones();
    case DegradationKind::OcclusionPatch: return spec.region == PatchRegion::Forehead ? a.forehead : a.lower_face;
    case DegradationKind::FrameLines: return a.eye_zones() | a.eye_surround;
    default: return RegionMask(ctx.size(), ctx.size(), true);
  }
}

template <class F>
void for_each_set(const RegionMask& m, F f) {
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.test(x, y)) f(x, y);
}

void paint(ImageBuffer& img, int x, int y, const std::array<int, 3>& c) {
  for (int k = 0; k < 3; ++k) img.at(x, y, k) = static_cast<std::uint8_t>(c[k]);
}

void scale_pixel(ImageBuffer& img, int x, int y, double f) {
  for (int k = 0; k < 3; ++k) img.at(x, y, k) = to_u8(img.at(x, y, k) * f);
}

// Smallest prefix (in the given scan order) of the target holding `fraction` of it.
RegionMask take_fraction(const RegionMask& target, double fraction, bool by_column, bool from_end) {
  const int w = target.width(), h = target.height();
  const int outer = by_column ? w : h;
  const auto need = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(target.count())));
  RegionMask out(w, h);
  std::size_t have = 0;
  for (int i = 0; i < outer && have < need; ++i) {
    const int line = from_end ? outer - 1 - i : i;
    const int inner = by_column ? h : w;
    for (int j = 0; j < inner; ++j) {
      const int x = by_column ? line : j, y = by_column ? j : line;
      if (target.test(x, y)) {
        out.set(x, y);
        ++have;
      }
    }
  }
  return out;
}

Rect mask_bbox(const RegionMask& m) {
  int x0 = m.width(), y0 = m.height(), x1 = -1, y1 = -1;
  for_each_set(m, [&](int x, int y) {
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  });
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

bool on_frame(double px, double py, const Rect& r, double t) {
  const double x0 = r.x, y0 = r.y, x1 = r.right() - 1, y1 = r.bottom() - 1;
  const double half = t / 2.0;
  const bool outer = px >= x0 - half && px <= x1 + half && py >= y0 - half && py <= y1 + half;
  const bool inner = px > x0 + half && px < x1 - half && py > y0 + half && py < y1 - half;
  return outer && !inner;
}

ImageBuffer pixelate(const ImageBuffer& img, double block, const Rect& crop_rect, int out_size) {
  const double sx = static_cast<double>(out_size) / crop_rect.width;
  const double sy = static_cast<double>(out_size) / crop_rect.height;
  auto bx = [&](int x) { return static_cast<int>(std::floor((x - crop_rect.x + 0.5) * sx / block)); };
  auto by = [&](int y) { return static_cast<int>(std::floor((y - crop_rect.y + 0.5) * sy / block)); };
  const int bx0 = bx(0), by0 = by(0);
  const int nbx = bx(img.width() - 1) - bx0 + 1, nby = by(img.height() - 1) - by0 + 1;
  std::vector<std::array<double, 4>> acc(static_cast<std::size_t>(nbx) * nby, {0, 0, 0, 0});
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      auto& a = acc[static_cast<std::size_t>(by(y) - by0) * nbx + (bx(x) - bx0)];
      for (int k = 0; k < 3; ++k) a[k] += img.at(x, y, k);
      a[3] += 1.0;
    }
  ImageBuffer out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const auto& a = acc[static_cast<std::size_t>(by(y) - by0) * nbx + (bx(x) - bx0)];
      for (int k = 0; k < 3; ++k) out.at(x, y, k) = to_u8(a[k] / a[3]);
    }
  return out;
}

}  // namespace

RegionMask target_region(const ImageBuffer& img, const DegradationSpec& spec, const Annotation* annotation,
                         const PreprocessConfig& cfg) {
  if (!is_region_targeted(spec.kind)) return RegionMask(img.width(), img.height(), true);
  const Geometry g = geometry(img, annotation, cfg, true);
  return g.to_source(crop_target(g.ctx, spec));
}

SynthSample apply(const ImageBuffer& img, const DegradationSpec& spec, const Annotation* annotation,
                  const PreprocessConfig& cfg) {
  if (img.channels() != 3) fail(ErrorCode::ChannelMismatch, "synth needs a 3-channel image");
  if (!(spec.severity >= 0.0)) fail(ErrorCode::InvalidArgument, "severity must be >= 0");
  SynthSample out{img, spec, implied_labels(spec)};
  if (spec.severity == 0.0) return out;
  ImageBuffer& o = out.image;
  const double s = spec.severity;
  const int w = img.width(), h = img.height();

  switch (spec.kind) {
    case DegradationKind::GaussianBlur:
      o = gaussian_blur(img, s);
      return out;
    case DegradationKind::WhiteNoise:
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          for (int k = 0; k < 3; ++k)
            o.at(x, y, k) = to_u8(img.at(x, y, k) + s * hash_normal(spec.seed, std::uint64_t(x), std::uint64_t(y), std::uint64_t(k)));
      return out;
    case DegradationKind::Pixelate: {
      Rect grid{0, 0, w, h};
      try {
        grid = geometry(img, annotation, cfg, false).ctx.crop_rect;
      } catch (const Error&) {
      }
      o = pixelate(img, s, grid, cfg.out_size);
      return out;
    }
    case DegradationKind::Darken:
    case DegradationKind::Brighten: {
      const double gamma = spec.kind == DegradationKind::Darken ? 1.0 + s : 1.0 / (1.0 + s);
      std::array<std::uint8_t, 256> lut{};
      for (int v = 0; v < 256; ++v) lut[v] = to_u8(255.0 * std::pow(v / 255.0, gamma));
      for (auto& v : o.data()) v = lut[v];
      return out;
    }
    case DegradationKind::ContrastCompress: {
      std::array<double, 3> mean{};
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          for (int k = 0; k < 3; ++k) mean[k] += img.at(x, y, k);
      for (double& m : mean) m /= static_cast<double>(img.pixel_count());
      const double keep = std::max(0.0, 1.0 - s);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          for (int k = 0; k < 3; ++k) o.at(x, y, k) = to_u8(mean[k] + keep * (img.at(x, y, k) - mean[k]));
      return out;
    }
    default: break;
  }

  const Geometry g = geometry(img, annotation, cfg, true);
  const RegionMask target = g.to_source(crop_target(g.ctx, spec));
  const LandmarkSet& lm = *g.ctx.landmarks;
  const Rect& cr = g.ctx.crop_rect;

  switch (spec.kind) {
    case DegradationKind::BackgroundClutter: {
      // whole cells of a 6x6 grid over the crop, taken in hashed order until
      // the requested share of the background is covered
      constexpr int kCells = 6;
      auto cell_of = [&](int x, int y) {
        const int cx = std::clamp((x - cr.x) * kCells / cr.width, 0, kCells - 1);
        const int cy = std::clamp((y - cr.y) * kCells / cr.height, 0, kCells - 1);
        return cy * kCells + cx;
      };
      std::array<std::size_t, kCells * kCells> counts{};
      for_each_set(target, [&](int x, int y) { ++counts[cell_of(x, y)]; });
      std::array<int, kCells * kCells> order{};
      for (int i = 0; i < kCells * kCells; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return hash_uniform(spec.seed, 7, std::uint64_t(a)) < hash_uniform(spec.seed, 7, std::uint64_t(b));
      });
      const double need = std::min(1.0, s) * static_cast<double>(target.count());
      std::array<bool, kCells * kCells> chosen{};
      double have = 0.0;
      for (int c : order) {
        if (have >= need) break;
        if (counts[c] == 0) continue;
        chosen[c] = true;
        have += static_cast<double>(counts[c]);
      }
      const std::array<int, 3> color = hash_uniform(spec.seed, 9) < 0.5 ? std::array<int, 3>{235, 232, 220}
                                                                        : std::array<int, 3>{40, 40, 44};
      for_each_set(target, [&](int x, int y) {
        if (chosen[cell_of(x, y)]) paint(o, x, y, color);
      });
      break;
    }
    case DegradationKind::BackgroundShadow:
      for_each_set(take_fraction(target, s, true, true), [&](int x, int y) { scale_pixel(o, x, y, 0.4); });
      break;
    case DegradationKind::FaceShadow:
      for_each_set(take_fraction(target, s, true, false), [&](int x, int y) { scale_pixel(o, x, y, 0.4); });
      break;
    case DegradationKind::SpecularBlob: {
      const Point2 c = g.src({lm.pupil_l.x, (lm.pupil_l.y + lm.mouth_corner_l.y) / 2.0});
      const auto need = static_cast<std::size_t>(std::ceil(std::min(1.0, s) * static_cast<double>(target.count())));
      // grow the disc until it covers the requested share of the skin
      RegionMask disc;
      for (double r = 0.5;; r += 0.25) {
        disc = ellipse_mask(w, h, c.x, c.y, r, r) & target;
        if (disc.count() >= need || r > w + h) break;
      }
      for_each_set(disc, [&](int x, int y) { paint(o, x, y, {255, 255, 255}); });
      break;
    }
    case DegradationKind::RedEye: {
      for (const auto& [pupil, a, b] : {std::tuple{lm.pupil_l, lm.eye_outer_l, lm.eye_inner_l},
                                        std::tuple{lm.pupil_r, lm.eye_inner_r, lm.eye_outer_r}}) {
        const double r = s * 0.3 * distance(a, b) * g.scale();
        const Point2 c = g.src(pupil);
        for_each_set(ellipse_mask(w, h, c.x, c.y, r, r) & target, [&](int x, int y) { paint(o, x, y, {210, 30, 35}); });
      }
      break;
    }
    case DegradationKind::OcclusionPatch: {
      const auto color = spec.color.value_or(default_patch_color(spec.region));
      const bool from_bottom = spec.region == PatchRegion::LowerFace;
      for_each_set(take_fraction(target, s, false, from_bottom), [&](int x, int y) { paint(o, x, y, color); });
      break;
    }
    case DegradationKind::FrameLines: {
      const Rect zl = mask_bbox(g.ctx.atlas.eye_zone_l);
      const Rect zr = mask_bbox(g.ctx.atlas.eye_zone_r);
      const double bridge_y = zl.y + (zl.height - 1) / 3.0;
      for_each_set(target, [&](int x, int y) {
        const Point2 p = source_to_crop(g.ctx, {double(x), double(y)});
        const bool bridge = p.x >= zl.right() - 1 && p.x <= zr.x && std::abs(p.y - bridge_y) <= s / 2.0;
        if (bridge || on_frame(p.x, p.y, zl, s) || on_frame(p.x, p.y, zr, s)) paint(o, x, y, {25, 25, 25});
      });
      break;
    }
    case DegradationKind::TintSkin:
      for_each_set(target, [&](int x, int y) {
        YCbCr c = rgb_to_ycbcr(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
        c.cr -= s;
        const Color3 rgb = ycbcr_to_rgb(c);
        paint(o, x, y, {to_u8(rgb.r), to_u8(rgb.g), to_u8(rgb.b)});
      });
      break;
    default: break;
  }
  return out;
}

// ---- plans -----------------------------------------------------------------------------

namespace {

PatchRegion region_from_string(const std::string& s) {
  if (s == "forehead") return PatchRegion::Forehead;
  if (s == "lower_face") return PatchRegion::LowerFace;
  fail(ErrorCode::SchemaMismatch, "plan: region must be forehead or lower_face");
}

}  // namespace

std::vector<PlanItem> parse_plan(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::SchemaMismatch, std::string("plan: ") + e.what());
  }
  if (!j.is_array()) fail(ErrorCode::SchemaMismatch, "plan: top level must be a list");
  std::vector<PlanItem> plan;
  for (const json& e : j) {
    if (!e.is_object()) fail(ErrorCode::SchemaMismatch, "plan: entries must be objects");
    for (const auto& [k, _] : e.items())
      if (k != "kind" && k != "severities" && k != "count" && k != "region" && k != "color")
        fail(ErrorCode::SchemaMismatch, "plan: unknown key " + k);
    if (!e.contains("kind") || !e["kind"].is_string()) fail(ErrorCode::SchemaMismatch, "plan: kind must be a string");
    PlanItem item;
    item.proto.kind = degradation_kind_from_string(e["kind"].get<std::string>());
    if (!e.contains("severities") || !e["severities"].is_array() || e["severities"].empty())
      fail(ErrorCode::SchemaMismatch, "plan: severities must be a non-empty list");
    for (const json& s : e["severities"]) {
      if (!s.is_number() || s.get<double>() < 0.0) fail(ErrorCode::SchemaMismatch, "plan: severities must be >= 0");
      item.severities.push_back(s.get<double>());
    }
    if (e.contains("count")) {
      if (!e["count"].is_number_integer() || e["count"].get<int>() < 1)
        fail(ErrorCode::SchemaMismatch, "plan: count must be a positive integer");
      item.count = e["count"].get<int>();
    }
    const bool patch = item.proto.kind == DegradationKind::OcclusionPatch;
    if ((e.contains("region") || e.contains("color")) && !patch)
      fail(ErrorCode::SchemaMismatch, "plan: region and color apply to occlusion_patch only");
    if (e.contains("region")) {
      if (!e["region"].is_string()) fail(ErrorCode::SchemaMismatch, "plan: region must be a string");
      item.proto.region = region_from_string(e["region"].get<std::string>());
    }
    if (e.contains("color")) {
      const json& c = e["color"];
      if (!c.is_array() || c.size() != 3) fail(ErrorCode::SchemaMismatch, "plan: color must be [r,g,b]");
      std::array<int, 3> rgb{};
      for (int k = 0; k < 3; ++k) {
        if (!c[k].is_number_integer() || c[k].get<int>() < 0 || c[k].get<int>() > 255)
          fail(ErrorCode::SchemaMismatch, "plan: color components must be integers in 0..255");
        rgb[k] = c[k].get<int>();
      }
      item.proto.color = rgb;
    }
    plan.push_back(std::move(item));
  }
  return plan;
}

std::vector<PlanItem> load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IOFailure, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_plan(ss.str());
}

std::string plan_to_json(const std::vector<PlanItem>& plan) {
  json arr = json::array();
  for (const PlanItem& p : plan) {
    json o = json::object();
    o["kind"] = std::string(to_string(p.proto.kind));
    o["severities"] = p.severities;
    o["count"] = p.count;
    if (p.proto.kind == DegradationKind::OcclusionPatch) {
      o["region"] = p.proto.region == PatchRegion::Forehead ? "forehead" : "lower_face";
      if (p.proto.color) o["color"] = *p.proto.color;
    }
    arr.push_back(std::move(o));
  }
  return arr.dump(2);
}

std::vector<PlanItem> default_plan(int count) {
  std::vector<PlanItem> plan;
  for (const auto& i : kind_table()) {
    if (i.kind == DegradationKind::OcclusionPatch) {
      for (PatchRegion r : {PatchRegion::Forehead, PatchRegion::LowerFace}) {
        PlanItem p{{i.kind, 0.0, 0, r, std::nullopt}, standard_ladder(i.kind), count};
        plan.push_back(p);
      }
      continue;
    }
    plan.push_back({{i.kind, 0.0, 0, PatchRegion::Forehead, std::nullopt}, standard_ladder(i.kind), count});
  }
  return plan;
}

// ---- corpora ---------------------------------------------------------------------------

std::vector<BaseImage> load_base_images(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) fail(ErrorCode::IOFailure, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") paths.push_back(entry.path());
  }
  if (ec) fail(ErrorCode::IOFailure, "cannot list " + dir.string());
  if (paths.empty()) fail(ErrorCode::IOFailure, "no base images in " + dir.string());
  std::sort(paths.begin(), paths.end());
  std::vector<BaseImage> bases;
  for (const auto& p : paths) bases.push_back({p.stem().string(), load_image(p), find_annotation(p)});
  return bases;
}

CorpusSummary build_corpus(const std::vector<BaseImage>& bases, const std::vector<PlanItem>& plan, std::uint64_t seed,
                           const std::filesystem::path& out) {
  if (bases.empty()) fail(ErrorCode::IOFailure, "no base images");
  const std::filesystem::path images = out / "images";
  std::error_code ec;
  std::filesystem::create_directories(images, ec);
  if (ec) fail(ErrorCode::IOFailure, "cannot create " + images.string());

  auto write = [&](const std::string& file, const ImageBuffer& img, const BaseImage& base) {
    save_image(img, images / file);
    if (base.annotation) save_annotation(*base.annotation, sidecar_path_for(images / file));
  };

  LabelTable table;
  CorpusSummary summary;
  std::set<std::size_t> used;
  std::set<int> affected;
  for (std::size_t pi = 0; pi < plan.size(); ++pi) {
    const PlanItem& item = plan[pi];
    for (int id : affected_tests(item.proto)) affected.insert(id);
    for (int i = 0; i < item.count; ++i) {
      const std::size_t b = static_cast<std::size_t>(i) % bases.size();
      used.insert(b);
      for (std::size_t si = 0; si < item.severities.size(); ++si) {
        if (item.severities[si] == 0.0) continue;
        DegradationSpec spec = item.proto;
        spec.severity = item.severities[si];
        spec.seed = hash_counter(seed, pi, std::uint64_t(i));
        const Annotation* ann = bases[b].annotation ? &*bases[b].annotation : nullptr;
        const SynthSample sample = apply(bases[b].image, spec, ann);
        std::string kind(to_string(spec.kind));
        if (spec.kind == DegradationKind::OcclusionPatch)
          kind += spec.region == PatchRegion::Forehead ? "_forehead" : "_lower_face";
        char name[256];
        std::snprintf(name, sizeof name, "%s_p%02zu_s%zu_%03d_%s.png", kind.c_str(), pi, si, i, bases[b].name.c_str());
        write(name, sample.image, bases[b]);
        table.push_back({std::string("images/") + name, sample.labels});
        ++summary.degraded;
      }
    }
  }
  for (std::size_t b : used) {
    char name[256];
    std::snprintf(name, sizeof name, "clean_%03zu_%s.png", b, bases[b].name.c_str());
    write(name, bases[b].image, bases[b]);
    LabelRow row{std::string("images/") + name, {}};
    for (int id : affected) row.labels[id - 1] = 1;
    table.push_back(std::move(row));
    ++summary.clean;
  }
  std::sort(table.begin(), table.end(), [](const LabelRow& a, const LabelRow& b) { return a.image < b.image; });
  save_labels(table, out / "labels.csv");
  return summary;
}

}  // namespace faceqvec
