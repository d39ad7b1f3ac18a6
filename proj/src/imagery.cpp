#include "faceqvec/imagery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "faceqvec/error.hpp"

namespace faceqvec {

namespace {

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

void require_channels(const ImageBuffer& img, int channels, const char* what) {
  if (img.channels() != channels) {
    fail(ErrorCode::ChannelMismatch, std::string(what) + ": expected " + std::to_string(channels) +
                                         " channel(s), got " + std::to_string(img.channels()));
  }
}

void require_same_dims(const RegionMask& a, int width, int height) {
  if (a.width() != width || a.height() != height) {
    fail(ErrorCode::InvalidArgument, "mask dimensions do not match image");
  }
}

}  // namespace

// ---- containers ----------------------------------------------------------------

ImageBuffer::ImageBuffer(int width, int height, int channels, std::uint8_t fill)
    : ImageBuffer(width, height, channels,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                                static_cast<std::size_t>(std::max(height, 0)) *
                                                static_cast<std::size_t>(std::max(channels, 0)),
                                            fill)) {}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width < 1 || height < 1) fail(ErrorCode::InvalidArgument, "image dimensions must be >= 1");
  if (channels != 1 && channels != 3) fail(ErrorCode::InvalidArgument, "channels must be 1 or 3");
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels)) {
    fail(ErrorCode::InvalidArgument, "pixel data length does not match width*height*channels");
  }
}

RealRaster::RealRaster(int width, int height, double fill)
    : width_(width),
      height_(height),
      data_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)),
            fill) {}

RegionMask::RegionMask(int width, int height, bool fill)
    : width_(width),
      height_(height),
      bits_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)),
            fill ? 1 : 0) {}

std::size_t RegionMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

RegionMask RegionMask::operator|(const RegionMask& other) const {
  require_same_dims(other, width_, height_);
  RegionMask out = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] | other.bits_[i];
  return out;
}

RegionMask RegionMask::operator&(const RegionMask& other) const {
  require_same_dims(other, width_, height_);
  RegionMask out = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] & other.bits_[i];
  return out;
}

RegionMask RegionMask::operator-(const RegionMask& other) const {
  require_same_dims(other, width_, height_);
  RegionMask out = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] & (other.bits_[i] ^ 1);
  return out;
}

RegionMask RegionMask::operator~() const {
  RegionMask out = *this;
  for (auto& b : out.bits_) b ^= 1;
  return out;
}

Kernel2D::Kernel2D(int size, std::vector<double> weights) : size_(size), weights_(std::move(weights)) {
  if (size < 3 || size % 2 == 0) fail(ErrorCode::InvalidArgument, "kernel size must be odd and >= 3");
  if (weights_.size() != static_cast<std::size_t>(size) * static_cast<std::size_t>(size)) {
    fail(ErrorCode::InvalidArgument, "kernel weights must be size*size");
  }
}

Kernel2D Kernel2D::laplacian() { return Kernel2D(3, {0, 1, 0, 1, -4, 1, 0, 1, 0}); }

Kernel2D Kernel2D::high_pass() {
  const double e = -1.0 / 8.0;
  return Kernel2D(3, {e, e, e, e, 1.0, e, e, e, e});
}

// ---- color ---------------------------------------------------------------------

double luminance(double r, double g, double b) noexcept { return 0.299 * r + 0.587 * g + 0.114 * b; }

YCbCr rgb_to_ycbcr(double r, double g, double b) noexcept {
  return {luminance(r, g, b), 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b,
          128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b};
}

Color3 ycbcr_to_rgb(const YCbCr& ycc) noexcept {
  const double cb = ycc.cb - 128.0;
  const double cr = ycc.cr - 128.0;
  return {ycc.y + 1.402 * cr, ycc.y - 0.344136 * cb - 0.714136 * cr, ycc.y + 1.772 * cb};
}

Hsv rgb_to_hsv(double r, double g, double b) noexcept {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out;
  out.value = mx / 255.0;
  out.saturation = mx > 0.0 ? delta / mx : 0.0;
  if (delta > 0.0) {
    double h;
    if (mx == r) {
      h = std::fmod((g - b) / delta, 6.0);
    } else if (mx == g) {
      h = (b - r) / delta + 2.0;
    } else {
      h = (r - g) / delta + 4.0;
    }
    h *= 60.0;
    out.hue = h < 0.0 ? h + 360.0 : h;
  }
  return out;
}

bool in_skin_ellipse(double cb, double cr, double widen) noexcept {
  constexpr double kCbCenter = 102.0, kCbHalf = 25.0;
  constexpr double kCrCenter = 153.0, kCrHalf = 20.0;
  const double u = (cb - kCbCenter) / (kCbHalf * widen);
  const double v = (cr - kCrCenter) / (kCrHalf * widen);
  return u * u + v * v <= 1.0;
}

ImageBuffer to_grayscale(const ImageBuffer& img) {
  require_channels(img, 3, "to_grayscale");
  ImageBuffer out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      out.at(x, y) = to_u8(luminance(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)));
  return out;
}

RealRaster luminance_raster(const ImageBuffer& img) {
  require_channels(img, 3, "luminance_raster");
  RealRaster out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      out.at(x, y) = luminance(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
  return out;
}

RealRaster to_real(const ImageBuffer& gray) {
  require_channels(gray, 1, "to_real");
  RealRaster out(gray.width(), gray.height());
  for (int y = 0; y < gray.height(); ++y)
    for (int x = 0; x < gray.width(); ++x) out.at(x, y) = gray.at(x, y);
  return out;
}

ImageBuffer to_ycbcr(const ImageBuffer& img) {
  require_channels(img, 3, "to_ycbcr");
  ImageBuffer out(img.width(), img.height(), 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const YCbCr v = rgb_to_ycbcr(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
      out.at(x, y, 0) = to_u8(v.y);
      out.at(x, y, 1) = to_u8(v.cb);
      out.at(x, y, 2) = to_u8(v.cr);
    }
  }
  return out;
}

ImageBuffer from_ycbcr(const ImageBuffer& ycc) {
  require_channels(ycc, 3, "from_ycbcr");
  ImageBuffer out(ycc.width(), ycc.height(), 3);
  for (int y = 0; y < ycc.height(); ++y) {
    for (int x = 0; x < ycc.width(); ++x) {
      const Color3 c = ycbcr_to_rgb({static_cast<double>(ycc.at(x, y, 0)), static_cast<double>(ycc.at(x, y, 1)),
                                     static_cast<double>(ycc.at(x, y, 2))});
      out.at(x, y, 0) = to_u8(c.r);
      out.at(x, y, 1) = to_u8(c.g);
      out.at(x, y, 2) = to_u8(c.b);
    }
  }
  return out;
}

// ---- filtering -------------------------------------------------------------------

int reflect101(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

RealRaster convolve(const RealRaster& img, const Kernel2D& k) {
  if (k.size() > img.width() || k.size() > img.height()) {
    fail(ErrorCode::KernelLargerThanImage, "kernel of size " + std::to_string(k.size()) + " exceeds " +
                                               std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  const int r = k.radius();
  const int w = img.width();
  const int h = img.height();
  RealRaster out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int j = 0; j < k.size(); ++j) {
        const int sy = reflect101(y + j - r, h);
        for (int i = 0; i < k.size(); ++i) {
          acc += k.at(i, j) * img.at(reflect101(x + i - r, w), sy);
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

RealRaster convolve(const ImageBuffer& gray, const Kernel2D& k) {
  require_channels(gray, 1, "convolve");
  return convolve(to_real(gray), k);
}

Gradients sobel(const RealRaster& img) {
  if (img.width() < 3 || img.height() < 3) fail(ErrorCode::ImageTooSmall, "Sobel needs at least 3x3 pixels");
  static const Kernel2D kx(3, {-0.25, 0, 0.25, -0.5, 0, 0.5, -0.25, 0, 0.25});
  static const Kernel2D ky(3, {-0.25, -0.5, -0.25, 0, 0, 0, 0.25, 0.5, 0.25});
  return {convolve(img, kx), convolve(img, ky)};
}

RealRaster gradient_magnitude(const RealRaster& img) {
  Gradients g = sobel(img);
  RealRaster out(img.width(), img.height());
  auto gx = g.gx.data();
  auto gy = g.gy.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::hypot(gx[i], gy[i]);
  return out;
}

RealRaster gradient_magnitude(const ImageBuffer& gray) {
  require_channels(gray, 1, "gradient_magnitude");
  return gradient_magnitude(to_real(gray));
}

RealRaster box_filter(const RealRaster& img, int radius) {
  const int w = img.width();
  const int h = img.height();
  RealRaster tmp(w, h);
  RealRaster out(w, h);
  const double norm = 1.0 / (2 * radius + 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d) acc += img.at(reflect101(x + d, w), y);
      tmp.at(x, y) = acc * norm;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d) acc += tmp.at(x, reflect101(y + d, h));
      out.at(x, y) = acc * norm;
    }
  return out;
}

ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& t : taps) t /= sum;

  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  std::vector<double> tmp(img.data().size());
  auto idx = [&](int x, int y, int c) {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(ch) +
           static_cast<std::size_t>(c);
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int d = -radius; d <= radius; ++d)
          acc += taps[static_cast<std::size_t>(d + radius)] * img.at(reflect101(x + d, w), y, c);
        tmp[idx(x, y, c)] = acc;
      }
  ImageBuffer out(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int d = -radius; d <= radius; ++d)
          acc += taps[static_cast<std::size_t>(d + radius)] * tmp[idx(x, reflect101(y + d, h), c)];
        out.at(x, y, c) = to_u8(acc);
      }
  return out;
}

// ---- statistics ------------------------------------------------------------------

Histogram histogram(const ImageBuffer& gray, const RegionMask* mask) {
  require_channels(gray, 1, "histogram");
  if (mask) require_same_dims(*mask, gray.width(), gray.height());
  Histogram hist{};
  std::uint64_t total = 0;
  for (int y = 0; y < gray.height(); ++y)
    for (int x = 0; x < gray.width(); ++x) {
      if (mask && !mask->test(x, y)) continue;
      ++hist[gray.at(x, y)];
      ++total;
    }
  if (total == 0) fail(ErrorCode::EmptyRegion, "histogram mask selects no pixels");
  return hist;
}

Histogram histogram(const RealRaster& gray, const RegionMask* mask) {
  if (mask) require_same_dims(*mask, gray.width(), gray.height());
  Histogram hist{};
  std::uint64_t total = 0;
  for (int y = 0; y < gray.height(); ++y)
    for (int x = 0; x < gray.width(); ++x) {
      if (mask && !mask->test(x, y)) continue;
      ++hist[to_u8(gray.at(x, y))];
      ++total;
    }
  if (total == 0) fail(ErrorCode::EmptyRegion, "histogram mask selects no pixels");
  return hist;
}

int percentile(const Histogram& hist, double p) {
  std::uint64_t total = 0;
  for (auto c : hist) total += c;
  if (total == 0) fail(ErrorCode::EmptyHistogram, "percentile of an empty histogram");
  if (p < 0.0 || p > 1.0) fail(ErrorCode::InvalidArgument, "percentile fraction must be in [0,1]");
  const double target = p * static_cast<double>(total);
  std::uint64_t cumulative = 0;
  for (int v = 0; v < 256; ++v) {
    cumulative += hist[static_cast<std::size_t>(v)];
    if (cumulative > 0 && static_cast<double>(cumulative) >= target) return v;
  }
  return 255;
}

double masked_mean(const RealRaster& img, const RegionMask& mask) {
  require_same_dims(mask, img.width(), img.height());
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (mask.test(x, y)) {
        sum += img.at(x, y);
        ++n;
      }
  if (n == 0) fail(ErrorCode::EmptyRegion, "mean over an empty region");
  return sum / static_cast<double>(n);
}

double masked_variance(const RealRaster& img, const RegionMask& mask) {
  const double mean = masked_mean(img, mask);
  double acc = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (mask.test(x, y)) {
        const double d = img.at(x, y) - mean;
        acc += d * d;
        ++n;
      }
  return acc / static_cast<double>(n);
}

double masked_median(const RealRaster& img, const RegionMask& mask) {
  require_same_dims(mask, img.width(), img.height());
  std::vector<double> values;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (mask.test(x, y)) values.push_back(img.at(x, y));
  if (values.empty()) fail(ErrorCode::EmptyRegion, "median over an empty region");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

// ---- regions -------------------------------------------------------------------

ComponentLabels label_components(const RegionMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  ComponentLabels out;
  out.width = w;
  out.labels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  std::vector<std::pair<int, int>> stack;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t i0 = static_cast<std::size_t>(y0) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x0);
      if (!mask.test(x0, y0) || out.labels[i0] >= 0) continue;
      const int label = static_cast<int>(out.components.size());
      Component comp;
      int minx = x0, maxx = x0, miny = y0, maxy = y0;
      out.labels[i0] = label;
      stack.assign(1, {x0, y0});
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        ++comp.pixel_count;
        minx = std::min(minx, x);
        maxx = std::max(maxx, x);
        miny = std::min(miny, y);
        maxy = std::max(maxy, y);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if ((dx == 0 && dy == 0) || !mask.contains(nx, ny)) continue;
            const std::size_t ni =
                static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) + static_cast<std::size_t>(nx);
            if (out.labels[ni] >= 0) continue;
            out.labels[ni] = label;
            stack.emplace_back(nx, ny);
          }
      }
      comp.bbox = {minx, miny, maxx - minx + 1, maxy - miny + 1};
      out.components.push_back(comp);
    }
  }
  return out;
}

std::vector<Component> connected_components(const RegionMask& mask) { return label_components(mask).components; }

RegionMask filter_small_components(const RegionMask& mask, std::size_t min_size) {
  const ComponentLabels cl = label_components(mask);
  RegionMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      const int l = cl.labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(cl.width) + static_cast<std::size_t>(x)];
      if (l >= 0 && cl.components[static_cast<std::size_t>(l)].pixel_count >= min_size) out.set(x, y);
    }
  return out;
}

RegionMask dilate(const RegionMask& mask, int radius) {
  if (radius <= 0) return mask;
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) offsets.emplace_back(dx, dy);
  RegionMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.test(x, y)) continue;
      for (auto [dx, dy] : offsets) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx >= 0 && ny >= 0 && nx < mask.width() && ny < mask.height()) out.set(nx, ny);
      }
    }
  return out;
}

RegionMask rect_mask(int width, int height, double x0, double y0, double x1, double y1) {
  RegionMask out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (x >= x0 && x <= x1 && y >= y0 && y <= y1) out.set(x, y);
  return out;
}

RegionMask ellipse_mask(int width, int height, double cx, double cy, double rx, double ry) {
  RegionMask out(width, height);
  if (rx <= 0.0 || ry <= 0.0) return out;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double u = (x - cx) / rx;
      const double v = (y - cy) / ry;
      if (u * u + v * v <= 1.0) out.set(x, y);
    }
  return out;
}

// ---- geometry ----------------------------------------------------------------------

ImageBuffer crop(const ImageBuffer& img, const Rect& r) {
  if (r.x < 0 || r.y < 0 || r.width < 1 || r.height < 1 || r.right() > img.width() || r.bottom() > img.height()) {
    fail(ErrorCode::InvalidArgument, "crop rectangle outside image");
  }
  ImageBuffer out(r.width, r.height, img.channels());
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(r.x + x, r.y + y, c);
  return out;
}

ImageBuffer resize_bilinear(const ImageBuffer& img, int out_width, int out_height) {
  if (out_width < 1 || out_height < 1) fail(ErrorCode::InvalidArgument, "resize target must be >= 1x1");
  if (out_width == img.width() && out_height == img.height()) return img;
  ImageBuffer out(out_width, out_height, img.channels());
  const double sx = static_cast<double>(img.width()) / out_width;
  const double sy = static_cast<double>(img.height()) / out_height;
  for (int oy = 0; oy < out_height; ++oy) {
    const double fy = std::clamp((oy + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height() - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double wy = fy - y0;
    for (int ox = 0; ox < out_width; ++ox) {
      const double fx = std::clamp((ox + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width() - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < img.channels(); ++c) {
        const double top = img.at(x0, y0, c) * (1.0 - wx) + img.at(x1, y0, c) * wx;
        const double bot = img.at(x0, y1, c) * (1.0 - wx) + img.at(x1, y1, c) * wx;
        out.at(ox, oy, c) = to_u8(top * (1.0 - wy) + bot * wy);
      }
    }
  }
  return out;
}

// ---- clustering --------------------------------------------------------------------

namespace {

double sq_dist(const Color3& a, const Color3& b) {
  const double dr = a.r - b.r, dg = a.g - b.g, db = a.b - b.b;
  return dr * dr + dg * dg + db * db;
}

// Platform-stable uniform draw in [0,1) from the raw 64-bit engine output.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double assign_all(std::span<const Color3> samples, const std::vector<Color3>& centroids, std::vector<int>& out) {
  double wcss = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    int best = 0;
    double best_d = sq_dist(samples[i], centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
      const double d = sq_dist(samples[i], centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    out[i] = best;
    wcss += best_d;
  }
  return wcss;
}

}  // namespace

KMeansResult kmeans(std::span<const Color3> samples, int k, std::uint64_t seed) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (samples.size() < static_cast<std::size_t>(k)) {
    fail(ErrorCode::TooFewSamples, std::to_string(samples.size()) + " samples for k=" + std::to_string(k));
  }
  std::mt19937_64 rng(seed);
  const std::size_t n = samples.size();

  KMeansResult res;
  res.centroids.reserve(static_cast<std::size_t>(k));
  res.centroids.push_back(samples[std::min(n - 1, static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(n)))]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(samples[i], res.centroids[0]);
  while (res.centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = std::min(n - 1, static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(n)));
    } else {
      const double target = unit_draw(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    res.centroids.push_back(samples[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(samples[i], res.centroids.back()));
  }

  constexpr int kMaxIterations = 50;
  constexpr double kShiftTolerance = 0.5;
  res.assignments.assign(n, 0);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    res.wcss_history.push_back(assign_all(samples, res.centroids, res.assignments));
    ++res.iterations;
    std::vector<Color3> sums(static_cast<std::size_t>(k));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[static_cast<std::size_t>(res.assignments[i])];
      s.r += samples[i].r;
      s.g += samples[i].g;
      s.b += samples[i].b;
      ++counts[static_cast<std::size_t>(res.assignments[i])];
    }
    double max_shift = 0.0;
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      const double inv = 1.0 / static_cast<double>(counts[c]);
      const Color3 next{sums[c].r * inv, sums[c].g * inv, sums[c].b * inv};
      max_shift = std::max(max_shift, std::sqrt(sq_dist(next, res.centroids[c])));
      res.centroids[c] = next;
    }
    if (max_shift < kShiftTolerance) break;
  }
  res.wcss_history.push_back(assign_all(samples, res.centroids, res.assignments));
  res.sizes.assign(static_cast<std::size_t>(k), 0);
  for (int a : res.assignments) ++res.sizes[static_cast<std::size_t>(a)];
  return res;
}

}  // namespace faceqvec
