#pragma once

#include <filesystem>

#include "faceqvec/imagery.hpp"

namespace faceqvec {

/// Decodes a PNG or JPEG file into a 3-channel RGB buffer. Alpha is dropped and
/// grayscale files are expanded. Throws Error(IOFailure) on any decode failure.
ImageBuffer load_image(const std::filesystem::path& path);

/// Encodes as PNG (lossless) or JPEG depending on the extension.
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

}  // namespace faceqvec
