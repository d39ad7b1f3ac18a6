#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include "faceqvec/error.hpp"
#include "faceqvec/preprocess.hpp"
#include "faceqvec/synth.hpp"

namespace testutil {

using namespace faceqvec;

inline ImageBuffer solid(int w, int h, int r, int g, int b) {
  ImageBuffer img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = static_cast<std::uint8_t>(r);
      img.at(x, y, 1) = static_cast<std::uint8_t>(g);
      img.at(x, y, 2) = static_cast<std::uint8_t>(b);
    }
  return img;
}

inline ImageBuffer random_image(int w, int h, int channels, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  ImageBuffer img(w, h, channels);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(d(rng));
  return img;
}

inline constexpr Rect kFace{16, 10, 80, 92};

/// Context over a prepared 112x112 crop with template landmarks for kFace.
inline FaceContext template_context(ImageBuffer crop, int face_count = 1) {
  const FixedLandmarkEstimator est(template_landmarks(kFace, crop.width()));
  return context_from_crop(std::move(crop), kFace, est, face_count);
}

inline FaceContext context_with(ImageBuffer crop, const LandmarkSet& lm) {
  const FixedLandmarkEstimator est(lm);
  return context_from_crop(std::move(crop), kFace, est);
}

inline FaceContext portrait_context(std::uint64_t seed) {
  const Portrait p = render_portrait(seed);
  return preprocess(p.image, {}, &p.annotation);
}

/// Error code thrown by f, or nullopt when it returns normally.
template <class F>
std::optional<ErrorCode> code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("faceqvec_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace testutil
