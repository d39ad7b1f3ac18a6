#pragma once

// Degradation oracle: planted defects with labels known by construction, and a
// renderer for simple frontal portraits to degrade.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "faceqvec/corpus.hpp"
#include "faceqvec/preprocess.hpp"
#include "faceqvec/sidecar.hpp"

namespace faceqvec {

enum class DegradationKind {
  GaussianBlur,
  WhiteNoise,
  Pixelate,
  Darken,
  Brighten,
  ContrastCompress,
  BackgroundClutter,
  BackgroundShadow,
  FaceShadow,
  SpecularBlob,
  RedEye,
  OcclusionPatch,
  FrameLines,
  TintSkin,
};

std::string_view to_string(DegradationKind k);
DegradationKind degradation_kind_from_string(std::string_view s);

enum class PatchRegion { Forehead, LowerFace };

/// Severity units per kind:
///   gaussian_blur sigma (source px); white_noise sigma (grey levels);
///   pixelate block size (crop px); darken/brighten gamma offset;
///   contrast_compress fraction of range removed; background_clutter share of
///   6x6 grid cells repainted; background_shadow / face_shadow / specular_blob /
///   occlusion_patch area fraction of the target region; red_eye disc radius in
///   units of 0.3 x eye width; frame_lines thickness (crop px); tint_skin Cr shift.
struct DegradationSpec {
  DegradationKind kind = DegradationKind::GaussianBlur;
  double severity = 0.0;
  std::uint64_t seed = 0;
  PatchRegion region = PatchRegion::Forehead;  // occlusion_patch only
  std::optional<std::array<int, 3>> color;     // occlusion_patch only
};

/// Test ids a kind is meant to trip, and the severity from which it does.
std::vector<int> affected_tests(const DegradationSpec& spec);
double defect_threshold(const DegradationSpec& spec);
bool is_region_targeted(DegradationKind k);

/// 0 at or above the defect threshold, 1 at severity 0, NA otherwise and for
/// every unaffected test.
std::array<std::optional<int>, kTestCount> implied_labels(const DegradationSpec& spec);

struct SynthSample {
  ImageBuffer image;
  DegradationSpec spec;
  std::array<std::optional<int>, kTestCount> labels{};
};

/// Region-targeted kinds need face geometry: it comes from `annotation` when
/// given, otherwise from the built-in detector and landmark estimator. Throws
/// Error(RegionUnavailable) when landmarks cannot be established.
SynthSample apply(const ImageBuffer& img, const DegradationSpec& spec, const Annotation* annotation = nullptr,
                  const PreprocessConfig& cfg = {});

/// Source-image pixels a region-targeted kind may modify.
RegionMask target_region(const ImageBuffer& img, const DegradationSpec& spec, const Annotation* annotation = nullptr,
                         const PreprocessConfig& cfg = {});

// ---- plans and corpora -------------------------------------------------------------

struct PlanItem {
  DegradationSpec proto;  // kind and kind parameters; severity and seed unused
  std::vector<double> severities;
  int count = 1;
};

/// JSON list of {"kind", "severities":[...], "count", "region"?, "color"?}.
/// Throws Error(SchemaMismatch).
std::vector<PlanItem> parse_plan(const std::string& json_text);
std::vector<PlanItem> load_plan(const std::filesystem::path& path);
std::string plan_to_json(const std::vector<PlanItem>& plan);

/// Severity ladder used by the tests and the default plan: five levels, 0 first.
std::vector<double> standard_ladder(DegradationKind k);
std::vector<PlanItem> default_plan(int count);

struct BaseImage {
  std::string name;  // file stem used to name outputs
  ImageBuffer image;
  std::optional<Annotation> annotation;
};

/// Loads every .png/.jpg/.jpeg in `dir` (sorted by name) with its sidecar.
/// Throws Error(IOFailure) for an unreadable directory or when it holds no
/// images.
std::vector<BaseImage> load_base_images(const std::filesystem::path& dir);

struct CorpusSummary {
  std::size_t degraded = 0;
  std::size_t clean = 0;
};

/// Writes `out/images/*.png` (with copied sidecars) and `out/labels.csv`.
/// Each plan item uses base images 0..count-1 (cycling); every base image used
/// gets one clean copy labeled 1 for all tests any plan item affects.
/// Severity-0 entries are covered by the clean copy and not written again.
CorpusSummary build_corpus(const std::vector<BaseImage>& bases, const std::vector<PlanItem>& plan, std::uint64_t seed,
                           const std::filesystem::path& out);

// ---- portraits ---------------------------------------------------------------------

struct Portrait {
  ImageBuffer image;
  Annotation annotation;  // detection box and exact landmarks of the drawn face
};

/// Bald frontal face on a plain background, drawn from the template
/// proportions, so every test passes at default thresholds.
Portrait render_portrait(std::uint64_t seed, const PreprocessConfig& cfg = {});

// ---- counter-based randomness ------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t hash_counter(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) noexcept;
/// Uniform in [0,1).
double hash_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) noexcept;
/// Standard normal via Box-Muller over two hashed uniforms.
double hash_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) noexcept;

}  // namespace faceqvec
