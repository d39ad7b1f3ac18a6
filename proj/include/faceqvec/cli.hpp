#pragma once

// Command-line front end. Each command returns its exit status so the whole
// surface can be driven from tests without spawning processes.
//
// Exit codes: 0 pass / success, 1 at least one computable test failed,
// 2 no face detected, 3 I/O, schema or usage error.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "faceqvec/calibration.hpp"
#include "faceqvec/error.hpp"
#include "faceqvec/quality_tests.hpp"
#include "faceqvec/sidecar.hpp"

namespace faceqvec {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitNoFace = 2;
inline constexpr int kExitError = 3;

/// One-line user-facing message for a failed test.
std::string_view remediation_hint(int test_id);

struct AssessReport {
  std::string image;
  QualityVector vector;  // 25 entries
  bool overall_pass = false;
};

/// Annotation precedence: explicit `annotation`, then the image's sidecar.
AssessReport assess_image(const std::filesystem::path& image, const ThresholdConfig& thresholds, const ScoringEnv& env,
                          const std::optional<Annotation>& annotation = std::nullopt,
                          const PreprocessConfig& cfg = {});

std::string assess_to_json(const AssessReport& r);
std::string assess_to_text(const AssessReport& r);

/// Per-test AUC, performance class, threshold and operating point.
std::string calibration_table(const CalibrationResult& r);

/// Maps a library error onto an exit code.
int exit_code_for(const Error& e);

/// Full CLI: `faceqvec <assess|calibrate|evaluate|synth|portraits> ...`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace faceqvec
