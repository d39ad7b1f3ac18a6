#include <algorithm>
#include <array>
#include <cmath>

#include "faceqvec/error.hpp"
#include "faceqvec/synth.hpp"

namespace faceqvec {

namespace {

using Rgb = std::array<double, 3>;

// Hue bases rescaled to a common luminance so faces read as mid-grey.
constexpr std::array<Rgb, 4> kSkin{{{168, 120, 96}, {160, 118, 98}, {172, 122, 92}, {165, 121, 104}}};
constexpr std::array<Rgb, 4> kBackground{{{140, 160, 190}, {120, 150, 140}, {100, 130, 160}, {150, 150, 175}}};
constexpr double kSkinLuma = 132.0;

constexpr Rgb kSclera{188, 186, 182};
constexpr Rgb kIris{78, 64, 56};
constexpr Rgb kPupil{24, 22, 22};
constexpr Rgb kBrow{50, 38, 30};
constexpr Rgb kNostril{58, 42, 36};
constexpr Rgb kLips{165, 98, 92};
constexpr Rgb kLipLine{70, 40, 40};

void put(ImageBuffer& img, int x, int y, const Rgb& c) {
  for (int k = 0; k < 3; ++k) img.at(x, y, k) = static_cast<std::uint8_t>(std::clamp(std::lround(c[k]), 0L, 255L));
}

template <class Inside>
void fill(ImageBuffer& img, double x0, double y0, double x1, double y1, const Rgb& c, Inside inside) {
  const int ix0 = std::max(0, static_cast<int>(std::floor(x0)));
  const int iy0 = std::max(0, static_cast<int>(std::floor(y0)));
  const int ix1 = std::min(img.width() - 1, static_cast<int>(std::ceil(x1)));
  const int iy1 = std::min(img.height() - 1, static_cast<int>(std::ceil(y1)));
  for (int y = iy0; y <= iy1; ++y)
    for (int x = ix0; x <= ix1; ++x)
      if (inside(double(x), double(y))) put(img, x, y, c);
}

void disc(ImageBuffer& img, const Point2& c, double rx, double ry, const Rgb& color) {
  fill(img, c.x - rx, c.y - ry, c.x + rx, c.y + ry, color, [&](double x, double y) {
    const double dx = (x - c.x) / rx, dy = (y - c.y) / ry;
    return dx * dx + dy * dy <= 1.0;
  });
}

Point2 map_point(const FaceContext& ctx, const Point2& p) { return source_to_crop(ctx, p); }

}  // namespace

Portrait render_portrait(std::uint64_t seed, const PreprocessConfig& cfg) {
  cfg.validate();
  auto u = [&](std::uint64_t k) { return hash_uniform(seed, 0x706f72ULL, k); };
  const int width = 180 + static_cast<int>(40 * u(1));
  const int height = 200 + static_cast<int>(30 * u(2));
  const int fw = 76 + static_cast<int>(20 * u(3));
  const int fh = static_cast<int>(std::lround(fw * (1.10 + 0.10 * u(4))));
  const int fx = (width - fw) / 2 + static_cast<int>(std::lround(16 * u(5) - 8));
  const int fy = (height - fh) / 2 + static_cast<int>(std::lround(16 * u(6) - 8));
  const Rect face{fx, fy, fw, fh};

  Rgb skin = kSkin[static_cast<std::size_t>(4 * u(7)) % kSkin.size()];
  const double luma = luminance(skin[0], skin[1], skin[2]);
  for (double& v : skin) v *= kSkinLuma / luma;
  const Rgb bg = kBackground[static_cast<std::size_t>(4 * u(8)) % kBackground.size()];

  ImageBuffer img(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) put(img, x, y, bg);

  // Source-space geometry; the canvas is large enough that nothing is clamped.
  const LandmarkSet src = template_landmarks(face, std::max(width, height) * 4);

  const double cx = face.x + (face.width - 1) / 2.0, cy = face.y + (face.height - 1) / 2.0;
  const double rx = (face.width - 1) / 2.0, ry = (face.height - 1) / 2.0;
  fill(img, cx - rx, cy - ry, cx + rx, cy + ry, skin, [&](double x, double y) {
    const double dx = (x - cx) / rx, dy = (y - cy) / ry;
    return dx * dx + dy * dy <= 1.0;
  });
  // soft falloff toward the jaw and temples
  for (int y = face.y; y < face.bottom(); ++y) {
    for (int x = face.x; x < face.right(); ++x) {
      const double dx = (x - cx) / rx, dy = (y - cy) / ry;
      const double r2 = dx * dx + dy * dy;
      if (r2 > 1.0) continue;
      const double f = 1.0 - 0.10 * r2;
      put(img, x, y, {skin[0] * f, skin[1] * f, skin[2] * f});
    }
  }

  const double eye_rx = distance(src.eye_outer_l, src.eye_inner_l) / 2.0;
  const double eye_ry = std::abs(src.lid_bot_l.y - src.lid_top_l.y) / 2.0;
  for (const Point2& p : {src.pupil_l, src.pupil_r}) {
    disc(img, p, eye_rx, eye_ry, kSclera);
    const double iris = 0.9 * eye_ry;
    fill(img, p.x - iris, p.y - iris, p.x + iris, p.y + iris, kIris, [&](double x, double y) {
      const double ex = (x - p.x) / eye_rx, ey = (y - p.y) / eye_ry;
      return std::hypot(x - p.x, y - p.y) <= iris && ex * ex + ey * ey <= 1.0;
    });
    disc(img, p, 0.4 * eye_ry, 0.4 * eye_ry, kPupil);
  }
  for (const Point2& b : {src.brow_l, src.brow_r}) {
    const double half = 0.12 * face.width;
    fill(img, b.x - half, b.y - 1.5, b.x + half, b.y + 1.5, kBrow,
         [&](double x, double y) { return std::abs(x - b.x) <= half && std::abs(y - b.y) <= 1.5; });
  }
  for (double side : {-1.0, 1.0}) disc(img, {src.nose_base.x + side * 0.05 * face.width, src.nose_base.y}, 1.6, 1.6, kNostril);

  const Point2 mouth = midpoint(src.mouth_corner_l, src.mouth_corner_r);
  disc(img, mouth, distance(src.mouth_corner_l, src.mouth_corner_r) / 2.0, 0.028 * face.height, kLips);
  const int line_y = static_cast<int>(std::lround(mouth.y));
  for (int x = static_cast<int>(std::ceil(src.mouth_corner_l.x)); x <= static_cast<int>(std::floor(src.mouth_corner_r.x)); ++x)
    put(img, x, line_y, kLipLine);

  // Ground truth in crop coordinates through the same mapping preprocessing uses.
  const FaceBox box{face.x, face.y, face.width, face.height, 1.0};
  FaceContext ctx;
  ctx.crop = ImageBuffer(cfg.out_size, cfg.out_size, 3);
  ctx.crop_rect = crop_region(width, height, box, cfg.margin);
  LandmarkSet lm = src;
  for (Point2* p : {&lm.pupil_l, &lm.pupil_r, &lm.eye_outer_l, &lm.eye_inner_l, &lm.eye_inner_r, &lm.eye_outer_r,
                    &lm.lid_top_l, &lm.lid_bot_l, &lm.lid_top_r, &lm.lid_bot_r, &lm.brow_l, &lm.brow_r, &lm.nose_tip,
                    &lm.nose_base, &lm.mouth_corner_l, &lm.mouth_corner_r, &lm.lip_top, &lm.lip_bot, &lm.chin})
    *p = map_point(ctx, *p);
  for (Point2& p : lm.contour) p = map_point(ctx, p);
  validate_landmarks(lm, cfg.out_size);

  Portrait out;
  out.image = std::move(img);
  out.annotation.boxes = {box};
  out.annotation.landmarks = std::move(lm);
  return out;
}

}  // namespace faceqvec
