#pragma once

// Pixel-level primitives shared by every quality test: rasters, color
// conversion, filtering, histograms, blob grouping and color clustering.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace faceqvec {

/// Owned row-major 8-bit raster with 1 or 3 interleaved channels (RGB order).
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, std::uint8_t fill = 0);
  ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::uint8_t& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<std::uint8_t> data() noexcept { return data_; }
  std::span<const std::uint8_t> data() const noexcept { return data_; }

  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Single-channel real-valued raster; intermediate results never get quantized.
class RealRaster {
 public:
  RealRaster() = default;
  RealRaster(int width, int height, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  double& at(int x, int y) { return data_[index(x, y)]; }
  double at(int x, int y) const { return data_[index(x, y)]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Per-pixel membership over an image grid.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(int width, int height, bool fill = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool test(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool value = true) { bits_[index(x, y)] = value ? 1 : 0; }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && test(x, y);
  }

  std::size_t count() const noexcept;
  bool empty() const noexcept { return count() == 0; }

  RegionMask operator|(const RegionMask& other) const;
  RegionMask operator&(const RegionMask& other) const;
  /// Set difference: pixels in *this that are not in other.
  RegionMask operator-(const RegionMask& other) const;
  RegionMask operator~() const;

  bool operator==(const RegionMask&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Square odd-sized filter; weights are row-major.
class Kernel2D {
 public:
  Kernel2D(int size, std::vector<double> weights);

  int size() const noexcept { return size_; }
  int radius() const noexcept { return size_ / 2; }
  double at(int col, int row) const {
    return weights_[static_cast<std::size_t>(row) * static_cast<std::size_t>(size_) +
                    static_cast<std::size_t>(col)];
  }

  static Kernel2D laplacian();
  static Kernel2D high_pass();

 private:
  int size_;
  std::vector<double> weights_;
};

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  int right() const noexcept { return x + width; }
  int bottom() const noexcept { return y + height; }
  bool operator==(const Rect&) const = default;
};

struct Color3 {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

struct YCbCr {
  double y = 0.0;
  double cb = 128.0;
  double cr = 128.0;
};

struct Hsv {
  double hue = 0.0;         // degrees [0, 360)
  double saturation = 0.0;  // [0, 1]
  double value = 0.0;       // [0, 1]
};

using Histogram = std::array<std::uint64_t, 256>;

// ---- color -----------------------------------------------------------------

double luminance(double r, double g, double b) noexcept;
YCbCr rgb_to_ycbcr(double r, double g, double b) noexcept;
Color3 ycbcr_to_rgb(const YCbCr& ycc) noexcept;
Hsv rgb_to_hsv(double r, double g, double b) noexcept;

/// Classical skin chroma model: the ellipse inscribed in Cb in [77,127],
/// Cr in [133,173]. `widen` scales both semi-axes (1.15 = widened by 15%).
bool in_skin_ellipse(double cb, double cr, double widen = 1.0) noexcept;

ImageBuffer to_grayscale(const ImageBuffer& img);
/// Unquantized BT.601 luminance of a 3-channel image.
RealRaster luminance_raster(const ImageBuffer& img);
RealRaster to_real(const ImageBuffer& gray);
ImageBuffer to_ycbcr(const ImageBuffer& img);
ImageBuffer from_ycbcr(const ImageBuffer& ycc);

// ---- filtering -------------------------------------------------------------

/// Reflect-101 index folding (abc|dcb style, edge sample not repeated).
int reflect101(int i, int n) noexcept;

/// Applies the kernel as a correlation (filter2D semantics): an impulse input
/// reproduces the kernel flipped about its center. Borders use reflect-101.
RealRaster convolve(const RealRaster& img, const Kernel2D& k);
RealRaster convolve(const ImageBuffer& gray, const Kernel2D& k);

struct Gradients {
  RealRaster gx;
  RealRaster gy;
};

/// 3x3 Sobel derivatives scaled by 1/4, so a step of height h reads as h on
/// the two pixels straddling it.
Gradients sobel(const RealRaster& img);
RealRaster gradient_magnitude(const RealRaster& img);
RealRaster gradient_magnitude(const ImageBuffer& gray);

RealRaster box_filter(const RealRaster& img, int radius);
ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma);

// ---- statistics --------------------------------------------------------------

Histogram histogram(const ImageBuffer& gray, const RegionMask* mask = nullptr);
Histogram histogram(const RealRaster& gray, const RegionMask* mask = nullptr);
int percentile(const Histogram& hist, double p);

double masked_mean(const RealRaster& img, const RegionMask& mask);
double masked_variance(const RealRaster& img, const RegionMask& mask);
double masked_median(const RealRaster& img, const RegionMask& mask);

// ---- regions -----------------------------------------------------------------

struct Component {
  std::size_t pixel_count = 0;
  Rect bbox;
};

struct ComponentLabels {
  std::vector<Component> components;
  std::vector<int> labels;  // -1 for background, else index into components
  int width = 0;
};

/// 8-connected labelling; components are ordered by first pixel in raster order.
ComponentLabels label_components(const RegionMask& mask);
std::vector<Component> connected_components(const RegionMask& mask);
/// Keeps only pixels belonging to components of at least min_size pixels.
RegionMask filter_small_components(const RegionMask& mask, std::size_t min_size);

RegionMask dilate(const RegionMask& mask, int radius);
RegionMask rect_mask(int width, int height, double x0, double y0, double x1, double y1);
RegionMask ellipse_mask(int width, int height, double cx, double cy, double rx, double ry);

// ---- geometry ------------------------------------------------------------------

ImageBuffer crop(const ImageBuffer& img, const Rect& r);
/// Bilinear resampling with pixel-center alignment; identity when sizes match.
ImageBuffer resize_bilinear(const ImageBuffer& img, int out_width, int out_height);

// ---- clustering ----------------------------------------------------------------

struct KMeansResult {
  std::vector<Color3> centroids;
  std::vector<int> assignments;
  std::vector<std::size_t> sizes;
  /// Within-cluster sum of squares after each assignment step.
  std::vector<double> wcss_history;
  int iterations = 0;
};

/// k-means++ seeding from a seeded PRNG, then Lloyd iterations until every
/// centroid moves less than 0.5 or 50 iterations elapse.
KMeansResult kmeans(std::span<const Color3> samples, int k, std::uint64_t seed);

}  // namespace faceqvec
