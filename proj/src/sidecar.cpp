#include "faceqvec/sidecar.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <string_view>

#include "json.hpp"

#include "faceqvec/error.hpp"

namespace faceqvec {

namespace {

using nlohmann::json;

struct NamedPoint {
  std::string_view name;
  Point2 LandmarkSet::*member;
};

constexpr std::array<NamedPoint, 19> kPoints{{
    {"pupil_l", &LandmarkSet::pupil_l},
    {"pupil_r", &LandmarkSet::pupil_r},
    {"eye_outer_l", &LandmarkSet::eye_outer_l},
    {"eye_inner_l", &LandmarkSet::eye_inner_l},
    {"eye_inner_r", &LandmarkSet::eye_inner_r},
    {"eye_outer_r", &LandmarkSet::eye_outer_r},
    {"lid_top_l", &LandmarkSet::lid_top_l},
    {"lid_bot_l", &LandmarkSet::lid_bot_l},
    {"lid_top_r", &LandmarkSet::lid_top_r},
    {"lid_bot_r", &LandmarkSet::lid_bot_r},
    {"brow_l", &LandmarkSet::brow_l},
    {"brow_r", &LandmarkSet::brow_r},
    {"nose_tip", &LandmarkSet::nose_tip},
    {"nose_base", &LandmarkSet::nose_base},
    {"mouth_corner_l", &LandmarkSet::mouth_corner_l},
    {"mouth_corner_r", &LandmarkSet::mouth_corner_r},
    {"lip_top", &LandmarkSet::lip_top},
    {"lip_bot", &LandmarkSet::lip_bot},
    {"chin", &LandmarkSet::chin},
}};

Point2 to_point(const json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail(ErrorCode::SchemaMismatch, std::string(what) + " must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json from_point(const Point2& p) { return json::array({p.x, p.y}); }

}  // namespace

std::filesystem::path sidecar_path_for(const std::filesystem::path& image) {
  return std::filesystem::path(image.string() + ".landmarks.json");
}

Annotation parse_annotation(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::SchemaMismatch, std::string("annotation is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::SchemaMismatch, "annotation must be a JSON object");

  for (const auto& [key, value] : doc.items()) {
    (void)value;
    bool known = key == "boxes" || key == "contour";
    for (const auto& p : kPoints) known = known || key == p.name;
    if (!known) fail(ErrorCode::SchemaMismatch, "unknown annotation key '" + key + "'");
  }

  Annotation out;
  std::size_t present = 0;
  for (const auto& p : kPoints) present += doc.contains(std::string(p.name)) ? 1 : 0;
  if (present > 0 || doc.contains("contour")) {
    if (present != kPoints.size() || !doc.contains("contour")) {
      fail(ErrorCode::SchemaMismatch, "annotation landmarks must include every named point and the contour");
    }
    LandmarkSet lm;
    for (const auto& p : kPoints) lm.*(p.member) = to_point(doc.at(std::string(p.name)), p.name);
    const json& contour = doc.at("contour");
    if (!contour.is_array()) fail(ErrorCode::SchemaMismatch, "contour must be an array of points");
    for (const auto& q : contour) lm.contour.push_back(to_point(q, "contour point"));
    out.landmarks = std::move(lm);
  }
  if (doc.contains("boxes")) {
    const json& boxes = doc.at("boxes");
    if (!boxes.is_array()) fail(ErrorCode::SchemaMismatch, "boxes must be an array");
    for (const auto& b : boxes) {
      if (!b.is_array() || b.size() != 5) fail(ErrorCode::SchemaMismatch, "box must be [x, y, w, h, conf]");
      for (const auto& v : b)
        if (!v.is_number()) fail(ErrorCode::SchemaMismatch, "box entries must be numbers");
      out.boxes.push_back({static_cast<int>(std::lround(b[0].get<double>())),
                           static_cast<int>(std::lround(b[1].get<double>())),
                           static_cast<int>(std::lround(b[2].get<double>())),
                           static_cast<int>(std::lround(b[3].get<double>())), b[4].get<double>()});
    }
  }
  return out;
}

std::string serialize_annotation(const Annotation& a) {
  json doc = json::object();
  if (a.landmarks) {
    for (const auto& p : kPoints) doc[std::string(p.name)] = from_point((*a.landmarks).*(p.member));
    json contour = json::array();
    for (const auto& q : a.landmarks->contour) contour.push_back(from_point(q));
    doc["contour"] = std::move(contour);
  }
  if (!a.boxes.empty()) {
    json boxes = json::array();
    for (const auto& b : a.boxes) boxes.push_back(json::array({b.x, b.y, b.w, b.h, b.confidence}));
    doc["boxes"] = std::move(boxes);
  }
  return doc.dump(2) + "\n";
}

Annotation load_annotation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IOFailure, "cannot read annotation " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_annotation(ss.str());
}

void save_annotation(const Annotation& a, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IOFailure, "cannot write annotation " + path.string());
  out << serialize_annotation(a);
  if (!out) fail(ErrorCode::IOFailure, "short write to " + path.string());
}

std::optional<Annotation> find_annotation(const std::filesystem::path& image) {
  const auto path = sidecar_path_for(image);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return load_annotation(path);
}

}  // namespace faceqvec
