#include "faceqvec/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "faceqvec/error.hpp"

namespace faceqvec {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

bool supported_extension(const std::string& ext) {
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) fail(ErrorCode::IOFailure, "no such file: " + path.string());
  cv::Mat bgr;
  try {
    bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    fail(ErrorCode::IOFailure, "cannot decode " + path.string() + ": " + e.what());
  }
  if (bgr.empty() || bgr.type() != CV_8UC3) fail(ErrorCode::IOFailure, "cannot decode image " + path.string());
  ImageBuffer out(bgr.cols, bgr.rows, 3);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      out.at(x, y, 0) = row[x][2];
      out.at(x, y, 1) = row[x][1];
      out.at(x, y, 2) = row[x][0];
    }
  }
  return out;
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (!supported_extension(ext)) fail(ErrorCode::IOFailure, "unsupported image format: " + path.string());
  cv::Mat mat;
  if (img.channels() == 3) {
    mat.create(img.height(), img.width(), CV_8UC3);
    for (int y = 0; y < img.height(); ++y) {
      auto* row = mat.ptr<cv::Vec3b>(y);
      for (int x = 0; x < img.width(); ++x) row[x] = cv::Vec3b(img.at(x, y, 2), img.at(x, y, 1), img.at(x, y, 0));
    }
  } else {
    mat.create(img.height(), img.width(), CV_8UC1);
    for (int y = 0; y < img.height(); ++y) {
      auto* row = mat.ptr<std::uint8_t>(y);
      for (int x = 0; x < img.width(); ++x) row[x] = img.at(x, y);
    }
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat);
  } catch (const cv::Exception& e) {
    fail(ErrorCode::IOFailure, "cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) fail(ErrorCode::IOFailure, "cannot write " + path.string());
}

}  // namespace faceqvec
