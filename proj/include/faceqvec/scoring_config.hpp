#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace faceqvec {

/// Constants that shape the raw quality scores. Decision thresholds live in
/// ThresholdConfig; nothing here decides pass or fail.
struct ScoringConfig {
  // test 1
  double blur_variance_ref = 250.0;
  // test 3
  double ink_saturation = 0.5;
  double ink_value = 0.3;
  int ink_min_blob = 20;
  // test 4
  double skin_widen = 1.15;
  // test 7
  double pixelation_ref = 0.5;
  int pixelation_min_lag = 2;
  int pixelation_max_lag = 16;
  // test 8
  double hair_color_distance = 30.0;
  int hair_band_rows = 8;
  // tests 9, 22
  double open_eye_ratio = 0.25;
  double open_mouth_ratio = 0.40;
  // test 10
  int kmeans_k = 3;
  std::uint64_t kmeans_seed = 0;
  int background_min_pixels = 200;
  double background_rms_ref = 64.0;
  // test 11
  double roll_limit = 15.0;
  double yaw_limit = 20.0;
  double pitch_limit = 20.0;
  double canonical_pitch_ratio = 0.85;
  // tests 12, 17
  double overexposure_level = 250.0;
  int overexposure_min_blob = 10;
  double overexposure_ref = 0.10;
  // test 13
  double red_eye_radius = 0.3;
  double red_eye_margin = 50.0;
  double red_eye_ref = 0.3;
  // tests 14, 15
  double shadow_ratio = 0.55;
  double shadow_chroma_tolerance = 12.0;
  double shadow_ref = 0.25;
  int shadow_min_blob = 20;
  int shadow_window = 10;
  // test 16
  double dark_level = 45.0;
  double dark_ref = 0.5;
  // tests 18, 19
  double edge_level = 80.0;
  double edge_ref = 0.30;
  int eye_opening_guard = 2;
  // tests 20, 21
  double occlusion_low_saturation = 0.25;
  double occlusion_low_value = 0.25;
  // test 24
  double noise_flat_level = 20.0;
  double noise_rms_ref = 12.0;
  double noise_min_flat_fraction = 0.05;
  // test 25
  double expression_aperture_ref = 0.15;
  double expression_lift_ref = 0.10;

  /// Parses a flat JSON object of the fields above; omitted keys keep their
  /// defaults and unknown keys are rejected with Error(SchemaMismatch).
  static ScoringConfig from_json(const std::string& text);
  static ScoringConfig load(const std::filesystem::path& path);
  std::string to_json() const;
};

}  // namespace faceqvec
