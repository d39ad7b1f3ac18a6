#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "faceqvec/face_model.hpp"

namespace faceqvec {

/// Contents of an `<image>.landmarks.json` annotation: named landmark points in
/// crop coordinates and/or detection boxes in source-image coordinates.
///
///   {"pupil_l":[x,y], ..., "contour":[[x,y],...], "boxes":[[x,y,w,h,conf],...]}
struct Annotation {
  std::optional<LandmarkSet> landmarks;
  std::vector<FaceBox> boxes;
};

std::filesystem::path sidecar_path_for(const std::filesystem::path& image);

Annotation parse_annotation(const std::string& json_text);
std::string serialize_annotation(const Annotation& a);

/// Throws Error(IOFailure) if unreadable, Error(SchemaMismatch) if malformed.
Annotation load_annotation(const std::filesystem::path& path);
void save_annotation(const Annotation& a, const std::filesystem::path& path);

/// Loads the sidecar next to `image` when one exists.
std::optional<Annotation> find_annotation(const std::filesystem::path& image);

}  // namespace faceqvec
