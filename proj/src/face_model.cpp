#include "faceqvec/face_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "faceqvec/error.hpp"

namespace faceqvec {

double distance(const Point2& a, const Point2& b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

Point2 midpoint(const Point2& a, const Point2& b) noexcept { return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}; }

namespace {

// Canonical frontal proportions as fractions of the face box.
constexpr double kEyeRow = 0.40;
constexpr double kPupilCol = 0.30;
constexpr double kEyeHalfWidth = 0.11;
constexpr double kEyeHalfHeight = 0.045;
constexpr double kBrowAbove = 0.16;
constexpr double kMouthRow = 0.76;
constexpr double kMouthHalfWidth = 0.17;
constexpr double kNoseTipFraction = 0.30;  // of eye-line-to-chin distance
constexpr double kCanonicalPitchRatio = 0.85;
constexpr int kContourPoints = 32;

Point2 clamp_point(Point2 p, int size) {
  const double hi = static_cast<double>(size - 1);
  return {std::clamp(p.x, 0.0, hi), std::clamp(p.y, 0.0, hi)};
}

std::vector<Point2> ellipse_contour(const Rect& face, int size) {
  const double cx = face.x + (face.width - 1) / 2.0;
  const double cy = face.y + (face.height - 1) / 2.0;
  const double rx = (face.width - 1) / 2.0;
  const double ry = (face.height - 1) / 2.0;
  std::vector<Point2> poly;
  poly.reserve(kContourPoints);
  for (int i = 0; i < kContourPoints; ++i) {
    const double t = 2.0 * std::numbers::pi * i / kContourPoints;
    poly.push_back(clamp_point({cx + rx * std::sin(t), cy - ry * std::cos(t)}, size));
  }
  return poly;
}

void clamp_all(LandmarkSet& lm, int size) {
  for (Point2* p : {&lm.pupil_l, &lm.pupil_r, &lm.eye_outer_l, &lm.eye_inner_l, &lm.eye_inner_r, &lm.eye_outer_r,
                    &lm.lid_top_l, &lm.lid_bot_l, &lm.lid_top_r, &lm.lid_bot_r, &lm.brow_l, &lm.brow_r, &lm.nose_tip,
                    &lm.nose_base, &lm.mouth_corner_l, &lm.mouth_corner_r, &lm.lip_top, &lm.lip_bot, &lm.chin}) {
    *p = clamp_point(*p, size);
  }
  for (auto& p : lm.contour) p = clamp_point(p, size);
}

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  auto on_segment = [](const Point2& p, const Point2& q, const Point2& r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
  };
  if (d1 == 0 && on_segment(c, d, a)) return true;
  if (d2 == 0 && on_segment(c, d, b)) return true;
  if (d3 == 0 && on_segment(a, b, c)) return true;
  if (d4 == 0 && on_segment(a, b, d)) return true;
  return false;
}

struct EyeBox {
  double x0, y0, x1, y1;
};

EyeBox eye_box(const Point2& outer, const Point2& inner, const Point2& top, const Point2& bot, double expand) {
  double x0 = std::min({outer.x, inner.x, top.x, bot.x});
  double x1 = std::max({outer.x, inner.x, top.x, bot.x});
  double y0 = std::min({outer.y, inner.y, top.y, bot.y});
  double y1 = std::max({outer.y, inner.y, top.y, bot.y});
  // A closed eye still gets a zone of plausible height.
  const double min_h = 0.35 * (x1 - x0);
  if (y1 - y0 < min_h) {
    const double cy = (y0 + y1) / 2.0;
    y0 = cy - min_h / 2.0;
    y1 = cy + min_h / 2.0;
  }
  const double w = x1 - x0;
  const double h = y1 - y0;
  return {x0 - expand * w, y0 - expand * h, x1 + expand * w, y1 + expand * h};
}

EyeBox scale_box(const EyeBox& b, double s) {
  const double cx = (b.x0 + b.x1) / 2.0, cy = (b.y0 + b.y1) / 2.0;
  const double hw = (b.x1 - b.x0) / 2.0 * s, hh = (b.y1 - b.y0) / 2.0 * s;
  return {cx - hw, cy - hh, cx + hw, cy + hh};
}

RegionMask box_mask(int size, const EyeBox& b) { return rect_mask(size, size, b.x0, b.y0, b.x1, b.y1); }

RegionMask opening_mask(int size, const Point2& outer, const Point2& inner, const Point2& top, const Point2& bot) {
  const Point2 c = midpoint(outer, inner);
  const double cy = (top.y + bot.y) / 2.0;
  const double rx = std::max(distance(outer, inner) / 2.0, 0.5);
  const double ry = std::max(std::abs(bot.y - top.y) / 2.0, 0.5);
  return ellipse_mask(size, size, c.x, cy, rx, ry);
}

}  // namespace

LandmarkSet template_landmarks(const Rect& face, int crop_size) {
  const double w = face.width;
  const double h = face.height;
  auto at = [&](double fx, double fy) { return Point2{face.x + fx * (w - 1), face.y + fy * (h - 1)}; };
  LandmarkSet lm;
  lm.pupil_l = at(kPupilCol, kEyeRow);
  lm.pupil_r = at(1.0 - kPupilCol, kEyeRow);
  lm.eye_outer_l = at(kPupilCol - kEyeHalfWidth, kEyeRow);
  lm.eye_inner_l = at(kPupilCol + kEyeHalfWidth, kEyeRow);
  lm.eye_inner_r = at(1.0 - kPupilCol - kEyeHalfWidth, kEyeRow);
  lm.eye_outer_r = at(1.0 - kPupilCol + kEyeHalfWidth, kEyeRow);
  lm.lid_top_l = at(kPupilCol, kEyeRow - kEyeHalfHeight);
  lm.lid_bot_l = at(kPupilCol, kEyeRow + kEyeHalfHeight);
  lm.lid_top_r = at(1.0 - kPupilCol, kEyeRow - kEyeHalfHeight);
  lm.lid_bot_r = at(1.0 - kPupilCol, kEyeRow + kEyeHalfHeight);
  lm.brow_l = at(kPupilCol, kEyeRow - kBrowAbove);
  lm.brow_r = at(1.0 - kPupilCol, kEyeRow - kBrowAbove);
  const double base_frac = kEyeRow + (1.0 - kEyeRow) * kCanonicalPitchRatio / (1.0 + kCanonicalPitchRatio);
  lm.nose_tip = at(0.5, kEyeRow + (1.0 - kEyeRow) * kNoseTipFraction);
  lm.nose_base = at(0.5, base_frac);
  lm.mouth_corner_l = at(0.5 - kMouthHalfWidth, kMouthRow);
  lm.mouth_corner_r = at(0.5 + kMouthHalfWidth, kMouthRow);
  lm.lip_top = at(0.5, kMouthRow);
  lm.lip_bot = at(0.5, kMouthRow);
  lm.chin = at(0.5, 1.0);
  lm.contour = ellipse_contour(face, crop_size);
  clamp_all(lm, crop_size);
  return lm;
}

bool polygon_is_simple(const std::vector<Point2>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      // Adjacent edges share a vertex by construction.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(a, b, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

RegionMask fill_polygon(int width, int height, const std::vector<Point2>& poly) {
  RegionMask out(width, height);
  const std::size_t n = poly.size();
  if (n < 3) return out;
  std::vector<double> xs;
  for (int y = 0; y < height; ++y) {
    xs.clear();
    const double py = y;
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = poly[i];
      const Point2& b = poly[(i + 1) % n];
      if ((a.y <= py && b.y > py) || (b.y <= py && a.y > py)) {
        xs.push_back(a.x + (py - a.y) / (b.y - a.y) * (b.x - a.x));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int x0 = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int x1 = std::min(width - 1, static_cast<int>(std::floor(xs[k + 1])));
      for (int x = x0; x <= x1; ++x) out.set(x, y);
    }
  }
  return out;
}

void validate_landmarks(const LandmarkSet& lm, int crop_size) {
  const double hi = crop_size - 1;
  auto inside = [&](const Point2& p) { return p.x >= 0 && p.y >= 0 && p.x <= hi && p.y <= hi; };
  for (const Point2* p : {&lm.pupil_l, &lm.pupil_r, &lm.eye_outer_l, &lm.eye_inner_l, &lm.eye_inner_r,
                          &lm.eye_outer_r, &lm.lid_top_l, &lm.lid_bot_l, &lm.lid_top_r, &lm.lid_bot_r, &lm.brow_l,
                          &lm.brow_r, &lm.nose_tip, &lm.nose_base, &lm.mouth_corner_l, &lm.mouth_corner_r,
                          &lm.lip_top, &lm.lip_bot, &lm.chin}) {
    if (!inside(*p)) fail(ErrorCode::DegenerateGeometry, "landmark outside the crop");
  }
  for (const auto& p : lm.contour)
    if (!inside(p)) fail(ErrorCode::DegenerateGeometry, "contour point outside the crop");
  if (!(lm.eye_inner_l.x < lm.eye_inner_r.x)) {
    fail(ErrorCode::DegenerateGeometry, "eye_inner_l must lie left of eye_inner_r");
  }
  if (lm.contour.size() < 8) fail(ErrorCode::DegenerateGeometry, "contour needs at least 8 points");
  if (!polygon_is_simple(lm.contour)) fail(ErrorCode::DegenerateGeometry, "contour self-intersects");
}

LandmarkSet mirror_landmarks(const LandmarkSet& lm, int crop_size) {
  const double axis = crop_size - 1;
  auto m = [axis](const Point2& p) { return Point2{axis - p.x, p.y}; };
  LandmarkSet out;
  out.pupil_l = m(lm.pupil_r);
  out.pupil_r = m(lm.pupil_l);
  out.eye_outer_l = m(lm.eye_outer_r);
  out.eye_inner_l = m(lm.eye_inner_r);
  out.eye_inner_r = m(lm.eye_inner_l);
  out.eye_outer_r = m(lm.eye_outer_l);
  out.lid_top_l = m(lm.lid_top_r);
  out.lid_bot_l = m(lm.lid_bot_r);
  out.lid_top_r = m(lm.lid_top_l);
  out.lid_bot_r = m(lm.lid_bot_l);
  out.brow_l = m(lm.brow_r);
  out.brow_r = m(lm.brow_l);
  out.nose_tip = m(lm.nose_tip);
  out.nose_base = m(lm.nose_base);
  out.mouth_corner_l = m(lm.mouth_corner_r);
  out.mouth_corner_r = m(lm.mouth_corner_l);
  out.lip_top = m(lm.lip_top);
  out.lip_bot = m(lm.lip_bot);
  out.chin = m(lm.chin);
  // Reversing keeps the traversal orientation of the mirrored polygon.
  out.contour.reserve(lm.contour.size());
  for (auto it = lm.contour.rbegin(); it != lm.contour.rend(); ++it) out.contour.push_back(m(*it));
  return out;
}

RegionAtlas build_region_atlas(const LandmarkSet& lm, int crop_size, const AtlasParams& params) {
  const double brow_y = (lm.brow_l.y + lm.brow_r.y) / 2.0;
  if (lm.chin.y <= brow_y) fail(ErrorCode::DegenerateGeometry, "chin must lie below the brow line");
  const int n = crop_size;

  RegionAtlas atlas;
  atlas.face = fill_polygon(n, n, lm.contour);
  atlas.background = ~dilate(atlas.face, params.background_dilation);

  const EyeBox zl = eye_box(lm.eye_outer_l, lm.eye_inner_l, lm.lid_top_l, lm.lid_bot_l, params.eye_zone_expand);
  const EyeBox zr = eye_box(lm.eye_outer_r, lm.eye_inner_r, lm.lid_top_r, lm.lid_bot_r, params.eye_zone_expand);
  atlas.eye_zone_l = box_mask(n, zl) & atlas.face;
  atlas.eye_zone_r = box_mask(n, zr) & atlas.face;
  const RegionMask zones = atlas.eye_zone_l | atlas.eye_zone_r;
  atlas.eye_surround =
      ((box_mask(n, scale_box(zl, params.eye_surround_scale)) | box_mask(n, scale_box(zr, params.eye_surround_scale))) &
       atlas.face) -
      zones;

  atlas.eye_openings = (opening_mask(n, lm.eye_outer_l, lm.eye_inner_l, lm.lid_top_l, lm.lid_bot_l) |
                        opening_mask(n, lm.eye_outer_r, lm.eye_inner_r, lm.lid_top_r, lm.lid_bot_r)) &
                       atlas.face;

  const double forehead_top = brow_y - params.forehead_fraction * (lm.chin.y - brow_y);
  atlas.forehead = rect_mask(n, n, 0, forehead_top, n - 1, brow_y) & atlas.face;
  atlas.lower_face = rect_mask(n, n, 0, lm.nose_base.y, n - 1, lm.chin.y) & atlas.face;

  const double mouth_w = std::max(distance(lm.mouth_corner_l, lm.mouth_corner_r), 1.0);
  const double mx0 = std::min({lm.mouth_corner_l.x, lm.mouth_corner_r.x, lm.lip_top.x, lm.lip_bot.x});
  const double mx1 = std::max({lm.mouth_corner_l.x, lm.mouth_corner_r.x, lm.lip_top.x, lm.lip_bot.x});
  const double my0 = std::min({lm.mouth_corner_l.y, lm.mouth_corner_r.y, lm.lip_top.y, lm.lip_bot.y});
  const double my1 = std::max({lm.mouth_corner_l.y, lm.mouth_corner_r.y, lm.lip_top.y, lm.lip_bot.y});
  atlas.mouth_zone =
      rect_mask(n, n, mx0 - 0.1 * mouth_w, my0 - 0.25 * mouth_w, mx1 + 0.1 * mouth_w, my1 + 0.25 * mouth_w) &
      atlas.face;

  atlas.skin = atlas.face - zones - atlas.eye_surround - atlas.mouth_zone;
  return atlas;
}

// ---- detectors --------------------------------------------------------------------

std::vector<FaceBox> SkinChromaDetector::detect(const ImageBuffer& img) const {
  if (img.channels() != 3) fail(ErrorCode::ChannelMismatch, "face detection needs a 3-channel image");
  RegionMask skin(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const YCbCr c = rgb_to_ycbcr(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
      if (in_skin_ellipse(c.cb, c.cr)) skin.set(x, y);
    }
  const double min_area = 0.01 * static_cast<double>(img.pixel_count());
  std::vector<Component> passing;
  std::size_t largest = 0;
  for (const Component& c : connected_components(skin)) {
    const double aspect = static_cast<double>(c.bbox.width) / c.bbox.height;
    if (aspect < 0.6 || aspect > 1.4) continue;
    if (static_cast<double>(c.pixel_count) < min_area) continue;
    if (c.bbox.width < 16 || c.bbox.height < 16) continue;
    passing.push_back(c);
    largest = std::max(largest, c.pixel_count);
  }
  std::vector<FaceBox> boxes;
  for (const Component& c : passing) {
    // Size relative to the largest candidate, blended with how elliptical the blob is.
    const double fill = static_cast<double>(c.pixel_count) / (static_cast<double>(c.bbox.width) * c.bbox.height);
    const double conf = 0.5 * static_cast<double>(c.pixel_count) / static_cast<double>(largest) +
                        0.5 * std::min(1.0, fill / (std::numbers::pi / 4.0));
    boxes.push_back({c.bbox.x, c.bbox.y, c.bbox.width, c.bbox.height, conf});
  }
  return boxes;
}

std::vector<FaceBox> FixedBoxDetector::detect(const ImageBuffer&) const { return boxes_; }

std::vector<FaceBox> detect_faces(const ImageBuffer& img, const FaceDetector& detector) {
  std::vector<FaceBox> boxes;
  for (FaceBox b : detector.detect(img)) {
    // Clamp into the image; drop boxes that collapse below the minimum size.
    const int x0 = std::clamp(b.x, 0, img.width());
    const int y0 = std::clamp(b.y, 0, img.height());
    const int x1 = std::clamp(b.x + b.w, 0, img.width());
    const int y1 = std::clamp(b.y + b.h, 0, img.height());
    b = {x0, y0, x1 - x0, y1 - y0, std::clamp(b.confidence, 0.0, 1.0)};
    if (b.w < 16 || b.h < 16) continue;
    boxes.push_back(b);
  }
  if (boxes.empty()) fail(ErrorCode::NoFaceDetected, "no face candidate passed the detector gates");
  std::stable_sort(boxes.begin(), boxes.end(), [](const FaceBox& a, const FaceBox& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  return boxes;
}

// ---- landmark fallback --------------------------------------------------------------

namespace {

struct PupilSearch {
  Point2 pupil;
  double depth;  // band median minus valley minimum
};

PupilSearch find_pupil(const RealRaster& gray, const RealRaster& smooth, int y0, int y1, int x0, int x1) {
  std::vector<double> band;
  double best = 1e300;
  int bx = x0, by = y0;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double v = smooth.at(x, y);
      band.push_back(v);
      if (v < best) {
        best = v;
        bx = x;
        by = y;
      }
    }
  const auto mid = band.begin() + static_cast<std::ptrdiff_t>(band.size() / 2);
  std::nth_element(band.begin(), mid, band.end());
  const double median = *mid;
  const double cutoff = best + 0.5 * (median - best);
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (int y = std::max(0, by - 6); y <= std::min(gray.height() - 1, by + 6); ++y)
    for (int x = std::max(0, bx - 6); x <= std::min(gray.width() - 1, bx + 6); ++x) {
      const double v = gray.at(x, y);
      if (v >= cutoff) continue;
      const double w = cutoff - v;
      sw += w;
      sx += w * x;
      sy += w * y;
    }
  Point2 p{static_cast<double>(bx), static_cast<double>(by)};
  if (sw > 0.0) p = {sx / sw, sy / sw};
  return {p, median - best};
}

double color_distance(const ImageBuffer& img, int x, int y, const Color3& ref) {
  const double dr = img.at(x, y, 0) - ref.r;
  const double dg = img.at(x, y, 1) - ref.g;
  const double db = img.at(x, y, 2) - ref.b;
  return std::sqrt(dr * dr + dg * dg + db * db);
}

Color3 median_color(const ImageBuffer& img, const RegionMask& mask) {
  std::array<std::vector<double>, 3> ch;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (mask.test(x, y))
        for (int c = 0; c < 3; ++c) ch[static_cast<std::size_t>(c)].push_back(img.at(x, y, c));
  if (ch[0].empty()) return {};
  std::array<double, 3> med{};
  for (std::size_t c = 0; c < 3; ++c) {
    auto mid = ch[c].begin() + static_cast<std::ptrdiff_t>(ch[c].size() / 2);
    std::nth_element(ch[c].begin(), mid, ch[c].end());
    med[c] = *mid;
  }
  return {med[0], med[1], med[2]};
}

struct EyeShape {
  Point2 left, right, top, bot;
};

// Eye opening = pixels unlike the cheek color, connected to the pupil.
std::optional<EyeShape> trace_eye(const ImageBuffer& crop, const Point2& pupil, const Color3& skin, const Rect& face) {
  const int n = crop.width();
  const double hw = 0.17 * face.width;
  const double hh = 0.09 * face.height;
  const int x0 = std::max(0, static_cast<int>(std::floor(pupil.x - hw)));
  const int x1 = std::min(n - 1, static_cast<int>(std::ceil(pupil.x + hw)));
  const int y0 = std::max(0, static_cast<int>(std::floor(pupil.y - hh)));
  const int y1 = std::min(crop.height() - 1, static_cast<int>(std::ceil(pupil.y + hh)));
  RegionMask m(crop.width(), crop.height());
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (color_distance(crop, x, y, skin) > 45.0) m.set(x, y);
  const int px = static_cast<int>(std::lround(pupil.x));
  const int py = static_cast<int>(std::lround(pupil.y));
  if (!m.contains(px, py)) return std::nullopt;
  const ComponentLabels cl = label_components(m);
  const int label = cl.labels[static_cast<std::size_t>(py) * static_cast<std::size_t>(cl.width) + static_cast<std::size_t>(px)];
  const Rect bb = cl.components[static_cast<std::size_t>(label)].bbox;
  const double width = bb.width - 1;
  if (width < 0.06 * face.width || width > 0.34 * face.width) return std::nullopt;

  auto column_center = [&](int x) {
    double sum = 0.0;
    int count = 0;
    for (int y = bb.y; y < bb.bottom(); ++y)
      if (cl.labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(cl.width) + static_cast<std::size_t>(x)] ==
          label) {
        sum += y;
        ++count;
      }
    return count > 0 ? sum / count : pupil.y;
  };
  int top = py, bot = py;
  for (int x = px - 1; x <= px + 1; ++x) {
    if (x < 0 || x >= n) continue;
    for (int y = bb.y; y < bb.bottom(); ++y)
      if (cl.labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(cl.width) + static_cast<std::size_t>(x)] ==
          label) {
        top = std::min(top, y);
        bot = std::max(bot, y);
      }
  }
  return EyeShape{{static_cast<double>(bb.x), column_center(bb.x)},
                  {static_cast<double>(bb.right() - 1), column_center(bb.right() - 1)},
                  {pupil.x, static_cast<double>(top)},
                  {pupil.x, static_cast<double>(bot)}};
}

double row_mean(const RealRaster& r, int y, int x0, int x1) {
  double s = 0.0;
  for (int x = x0; x <= x1; ++x) s += r.at(x, y);
  return s / (x1 - x0 + 1);
}

}  // namespace

LandmarkSet TemplateLandmarkEstimator::estimate(const ImageBuffer& crop, const Rect& face) const {
  if (crop.channels() != 3) fail(ErrorCode::ChannelMismatch, "landmark estimation needs a 3-channel crop");
  const int n = crop.width();
  const double unit = n / 112.0;
  LandmarkSet lm = template_landmarks(face, n);

  const RealRaster gray = luminance_raster(crop);
  const RealRaster smooth = box_filter(gray, 2);
  const int band0 = std::clamp(static_cast<int>(std::lround(35 * unit)), 0, n - 1);
  const int band1 = std::clamp(static_cast<int>(std::lround(55 * unit)), 0, n - 1);
  const double cx = face.x + (face.width - 1) / 2.0;
  const int lx0 = std::clamp(static_cast<int>(face.x + 0.12 * face.width), 0, n - 1);
  const int lx1 = std::clamp(static_cast<int>(cx - 0.06 * face.width), 0, n - 1);
  const int rx0 = std::clamp(static_cast<int>(cx + 0.06 * face.width), 0, n - 1);
  const int rx1 = std::clamp(static_cast<int>(face.right() - 0.12 * face.width), 0, n - 1);
  if (lx1 <= lx0 || rx1 <= rx0) fail(ErrorCode::LandmarkFailure, "face box too narrow for eye search");

  constexpr double kMinValleyDepth = 25.0;
  const PupilSearch left = find_pupil(gray, smooth, band0, band1, lx0, lx1);
  const PupilSearch right = find_pupil(gray, smooth, band0, band1, rx0, rx1);
  if (left.depth < kMinValleyDepth || right.depth < kMinValleyDepth) {
    fail(ErrorCode::LandmarkFailure, "no distinct pupil valley in the eye band");
  }
  lm.pupil_l = left.pupil;
  lm.pupil_r = right.pupil;
  const double eye_y = (lm.pupil_l.y + lm.pupil_r.y) / 2.0;

  // Cheek reference color below each eye.
  RegionMask cheeks(n, n);
  for (const Point2& p : {lm.pupil_l, lm.pupil_r}) {
    cheeks = cheeks | rect_mask(n, n, p.x - 0.06 * face.width, p.y + 0.12 * face.height, p.x + 0.06 * face.width,
                                p.y + 0.22 * face.height);
  }
  const Color3 skin = median_color(crop, cheeks);

  const double hw = kEyeHalfWidth * (face.width - 1);
  const double hh = kEyeHalfHeight * (face.height - 1);
  if (auto e = trace_eye(crop, lm.pupil_l, skin, face)) {
    lm.eye_outer_l = e->left;
    lm.eye_inner_l = e->right;
    lm.lid_top_l = e->top;
    lm.lid_bot_l = e->bot;
  } else {
    lm.eye_outer_l = {lm.pupil_l.x - hw, lm.pupil_l.y};
    lm.eye_inner_l = {lm.pupil_l.x + hw, lm.pupil_l.y};
    lm.lid_top_l = {lm.pupil_l.x, lm.pupil_l.y - hh};
    lm.lid_bot_l = {lm.pupil_l.x, lm.pupil_l.y + hh};
  }
  if (auto e = trace_eye(crop, lm.pupil_r, skin, face)) {
    lm.eye_inner_r = e->left;
    lm.eye_outer_r = e->right;
    lm.lid_top_r = e->top;
    lm.lid_bot_r = e->bot;
  } else {
    lm.eye_inner_r = {lm.pupil_r.x - hw, lm.pupil_r.y};
    lm.eye_outer_r = {lm.pupil_r.x + hw, lm.pupil_r.y};
    lm.lid_top_r = {lm.pupil_r.x, lm.pupil_r.y - hh};
    lm.lid_bot_r = {lm.pupil_r.x, lm.pupil_r.y + hh};
  }

  const double skin_gray = luminance(skin.r, skin.g, skin.b);
  auto find_brow = [&](const Point2& pupil, double lid_top) {
    const int bx0 = std::clamp(static_cast<int>(pupil.x - 0.06 * face.width), 0, n - 1);
    const int bx1 = std::clamp(static_cast<int>(pupil.x + 0.06 * face.width), 0, n - 1);
    const int by0 = std::clamp(static_cast<int>(pupil.y - 0.30 * face.height), 0, n - 1);
    const int by1 = std::clamp(static_cast<int>(lid_top) - 2, 0, n - 1);
    double best = 1e300;
    int best_y = -1;
    for (int y = by0; y <= by1; ++y) {
      const double v = row_mean(gray, y, bx0, bx1);
      if (v < best) {
        best = v;
        best_y = y;
      }
    }
    if (best_y < 0 || skin_gray - best < 15.0) return Point2{pupil.x, pupil.y - kBrowAbove * (face.height - 1)};
    return Point2{pupil.x, static_cast<double>(best_y)};
  };
  lm.brow_l = find_brow(lm.pupil_l, lm.lid_top_l.y);
  lm.brow_r = find_brow(lm.pupil_r, lm.lid_top_r.y);

  const double chin_y = face.y + face.height - 1;
  const double nose_x = (lm.pupil_l.x + lm.pupil_r.x) / 2.0;
  lm.nose_tip = {nose_x, eye_y + kNoseTipFraction * (chin_y - eye_y)};
  lm.nose_base = {nose_x, eye_y + kCanonicalPitchRatio / (1.0 + kCanonicalPitchRatio) * (chin_y - eye_y)};

  // Mouth line: strongest horizontal edge energy in the canonical mouth band,
  // refined to the darkest nearby row.
  const Gradients grad = sobel(gray);
  const int mx0 = std::clamp(static_cast<int>(cx - 0.18 * face.width), 1, n - 2);
  const int mx1 = std::clamp(static_cast<int>(cx + 0.18 * face.width), 1, n - 2);
  const int my0 = std::clamp(std::max(static_cast<int>(std::lround(70 * unit)), static_cast<int>(lm.nose_base.y) + 2), 1,
                             n - 2);
  const int my1 = std::clamp(std::min(static_cast<int>(std::lround(95 * unit)), static_cast<int>(chin_y) - 3), 1, n - 2);
  double best_energy = 0.0;
  int mouth_y = -1;
  for (int y = my0; y <= my1; ++y) {
    double e = 0.0;
    for (int x = mx0; x <= mx1; ++x) e += std::abs(grad.gy.at(x, y));
    e /= (mx1 - mx0 + 1);
    if (e > best_energy) {
      best_energy = e;
      mouth_y = y;
    }
  }
  const int cxi = std::clamp(static_cast<int>(std::lround(cx)), 0, n - 1);
  if (mouth_y >= 0 && best_energy >= 4.0) {
    const int nx0 = std::clamp(static_cast<int>(cx - 0.08 * face.width), 0, n - 1);
    const int nx1 = std::clamp(static_cast<int>(cx + 0.08 * face.width), 0, n - 1);
    int darkest = mouth_y;
    double dv = 1e300;
    for (int y = std::max(0, mouth_y - 3); y <= std::min(n - 1, mouth_y + 3); ++y) {
      const double v = row_mean(gray, y, nx0, nx1);
      if (v < dv) {
        dv = v;
        darkest = y;
      }
    }
    mouth_y = darkest;

    // Corners: walk outwards while pixels stay unlike the cheek color.
    auto walk = [&](int dir) {
      int x = cxi;
      int gap = 0;
      int last = cxi;
      while (x + dir >= 0 && x + dir < n && gap <= 1) {
        x += dir;
        if (color_distance(crop, x, mouth_y, skin) > 30.0) {
          last = x;
          gap = 0;
        } else {
          ++gap;
        }
      }
      return last;
    };
    int left_x = walk(-1);
    int right_x = walk(+1);
    const double width = right_x - left_x;
    if (width < 0.2 * face.width || width > 0.7 * face.width) {
      left_x = static_cast<int>(std::lround(cx - kMouthHalfWidth * (face.width - 1)));
      right_x = static_cast<int>(std::lround(cx + kMouthHalfWidth * (face.width - 1)));
    }
    auto corner_row = [&](int x_edge, int inward) {
      const int x = std::clamp(x_edge + inward * 2, 0, n - 1);
      int best_y = mouth_y;
      double best_v = gray.at(x, mouth_y);
      for (int y = std::max(0, mouth_y - 5); y <= std::min(n - 1, mouth_y + 5); ++y) {
        if (gray.at(x, y) < best_v) {
          best_v = gray.at(x, y);
          best_y = y;
        }
      }
      return static_cast<double>(best_y);
    };
    lm.mouth_corner_l = {static_cast<double>(left_x), corner_row(left_x, +1)};
    lm.mouth_corner_r = {static_cast<double>(right_x), corner_row(right_x, -1)};

    const double dark = 0.55 * skin_gray;
    int top = mouth_y, bot = mouth_y;
    if (gray.at(cxi, mouth_y) < dark) {
      while (top - 1 >= 0 && gray.at(cxi, top - 1) < dark) --top;
      while (bot + 1 < n && gray.at(cxi, bot + 1) < dark) ++bot;
    }
    lm.lip_top = {cx, static_cast<double>(top)};
    lm.lip_bot = {cx, static_cast<double>(bot)};
  }
  lm.chin = {cx, chin_y};
  clamp_all(lm, n);
  return lm;
}

LandmarkSet estimate_landmarks(const ImageBuffer& crop, const Rect& face, const LandmarkEstimator& estimator) {
  return estimator.estimate(crop, face);
}

// ---- pose -------------------------------------------------------------------------------

PoseAngles GeometricPoseEstimator::estimate(const LandmarkSet& lm) const {
  constexpr double kDeg = 180.0 / std::numbers::pi;
  PoseAngles pose;
  pose.roll = std::clamp(std::atan2(lm.pupil_r.y - lm.pupil_l.y, lm.pupil_r.x - lm.pupil_l.x) * kDeg, -90.0, 90.0);
  const double d_l = std::abs(lm.nose_tip.x - lm.eye_outer_l.x);
  const double d_r = std::abs(lm.nose_tip.x - lm.eye_outer_r.x);
  if (d_l + d_r == 0.0) fail(ErrorCode::DegenerateGeometry, "eye corners coincide with the nose tip");
  pose.yaw = 90.0 * (d_l - d_r) / (d_l + d_r);
  const double eye_y = (lm.pupil_l.y + lm.pupil_r.y) / 2.0;
  const double lower = lm.chin.y - lm.nose_base.y;
  if (lower <= 0.0) fail(ErrorCode::DegenerateGeometry, "nose base must lie above the chin");
  const double r = (lm.nose_base.y - eye_y) / lower;
  pose.pitch = std::clamp(90.0 * (r - r0_) / r0_, -90.0, 90.0);
  return pose;
}

PoseAngles estimate_pose(const LandmarkSet& lm, const PoseEstimator& estimator) { return estimator.estimate(lm); }

}  // namespace faceqvec
