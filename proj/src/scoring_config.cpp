#include "faceqvec/scoring_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <variant>
#include <vector>

#include "json.hpp"

#include "faceqvec/error.hpp"

namespace faceqvec {

namespace {

using Field = std::variant<double ScoringConfig::*, int ScoringConfig::*, std::uint64_t ScoringConfig::*>;

const std::vector<std::pair<const char*, Field>>& fields() {
  static const std::vector<std::pair<const char*, Field>> table{
      {"blur_variance_ref", &ScoringConfig::blur_variance_ref},
      {"ink_saturation", &ScoringConfig::ink_saturation},
      {"ink_value", &ScoringConfig::ink_value},
      {"ink_min_blob", &ScoringConfig::ink_min_blob},
      {"skin_widen", &ScoringConfig::skin_widen},
      {"pixelation_ref", &ScoringConfig::pixelation_ref},
      {"pixelation_min_lag", &ScoringConfig::pixelation_min_lag},
      {"pixelation_max_lag", &ScoringConfig::pixelation_max_lag},
      {"hair_color_distance", &ScoringConfig::hair_color_distance},
      {"hair_band_rows", &ScoringConfig::hair_band_rows},
      {"open_eye_ratio", &ScoringConfig::open_eye_ratio},
      {"open_mouth_ratio", &ScoringConfig::open_mouth_ratio},
      {"kmeans_k", &ScoringConfig::kmeans_k},
      {"kmeans_seed", &ScoringConfig::kmeans_seed},
      {"background_min_pixels", &ScoringConfig::background_min_pixels},
      {"background_rms_ref", &ScoringConfig::background_rms_ref},
      {"roll_limit", &ScoringConfig::roll_limit},
      {"yaw_limit", &ScoringConfig::yaw_limit},
      {"pitch_limit", &ScoringConfig::pitch_limit},
      {"canonical_pitch_ratio", &ScoringConfig::canonical_pitch_ratio},
      {"overexposure_level", &ScoringConfig::overexposure_level},
      {"overexposure_min_blob", &ScoringConfig::overexposure_min_blob},
      {"overexposure_ref", &ScoringConfig::overexposure_ref},
      {"red_eye_radius", &ScoringConfig::red_eye_radius},
      {"red_eye_margin", &ScoringConfig::red_eye_margin},
      {"red_eye_ref", &ScoringConfig::red_eye_ref},
      {"shadow_ratio", &ScoringConfig::shadow_ratio},
      {"shadow_chroma_tolerance", &ScoringConfig::shadow_chroma_tolerance},
      {"shadow_ref", &ScoringConfig::shadow_ref},
      {"shadow_min_blob", &ScoringConfig::shadow_min_blob},
      {"shadow_window", &ScoringConfig::shadow_window},
      {"dark_level", &ScoringConfig::dark_level},
      {"dark_ref", &ScoringConfig::dark_ref},
      {"edge_level", &ScoringConfig::edge_level},
      {"edge_ref", &ScoringConfig::edge_ref},
      {"eye_opening_guard", &ScoringConfig::eye_opening_guard},
      {"occlusion_low_saturation", &ScoringConfig::occlusion_low_saturation},
      {"occlusion_low_value", &ScoringConfig::occlusion_low_value},
      {"noise_flat_level", &ScoringConfig::noise_flat_level},
      {"noise_rms_ref", &ScoringConfig::noise_rms_ref},
      {"noise_min_flat_fraction", &ScoringConfig::noise_min_flat_fraction},
      {"expression_aperture_ref", &ScoringConfig::expression_aperture_ref},
      {"expression_lift_ref", &ScoringConfig::expression_lift_ref},
  };
  return table;
}

}  // namespace

ScoringConfig ScoringConfig::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::SchemaMismatch, std::string("scoring config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::SchemaMismatch, "scoring config must be a JSON object");
  ScoringConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    const auto it = std::find_if(fields().begin(), fields().end(), [&](const auto& f) { return key == f.first; });
    if (it == fields().end()) fail(ErrorCode::SchemaMismatch, "unknown scoring config key '" + key + "'");
    if (!value.is_number()) fail(ErrorCode::SchemaMismatch, "scoring config key '" + key + "' must be a number");
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(cfg.*member)>;
          if constexpr (std::is_same_v<T, double>) {
            cfg.*member = value.get<double>();
          } else {
            if (!value.is_number_integer()) {
              fail(ErrorCode::SchemaMismatch, "scoring config key '" + key + "' must be an integer");
            }
            if constexpr (std::is_same_v<T, std::uint64_t>) {
              if (value.get<std::int64_t>() < 0) fail(ErrorCode::SchemaMismatch, "'" + key + "' must be >= 0");
            }
            cfg.*member = value.get<T>();
          }
        },
        it->second);
  }
  if (cfg.kmeans_k < 1) fail(ErrorCode::SchemaMismatch, "kmeans_k must be >= 1");
  if (cfg.pixelation_min_lag < 2 || cfg.pixelation_max_lag < cfg.pixelation_min_lag) {
    fail(ErrorCode::SchemaMismatch, "pixelation lag range is invalid");
  }
  return cfg;
}

ScoringConfig ScoringConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IOFailure, "cannot read scoring config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string ScoringConfig::to_json() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [name, field] : fields()) {
    std::visit([&](auto member) { doc[name] = this->*member; }, field);
  }
  return doc.dump(2) + "\n";
}

}  // namespace faceqvec
