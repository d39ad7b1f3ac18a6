#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>

namespace faceqvec {

inline constexpr int kTestCount = 25;

/// Threshold that no score in [0,1] can reach: selected when the best ROC
/// operating point is the "reject everything" corner.
inline const double kRejectAllThreshold = std::nextafter(1.0, 2.0);

enum class Provenance { Calibrated, Default };

struct ThresholdEntry {
  int id = 0;
  double threshold = 0.5;
  Provenance provenance = Provenance::Default;
  std::optional<double> tpr;
  std::optional<double> fpr;
  std::optional<double> auc;
};

/// Per-test decision thresholds, persisted as
/// {"version":1,"tests":[{"id":1,"threshold":0.41,"provenance":"calibrated","tpr":0.93,"fpr":0.44},...]}.
struct ThresholdConfig {
  std::array<ThresholdEntry, kTestCount> tests{};

  /// Threshold 0.5 with provenance "default" for every test.
  static ThresholdConfig defaults();

  const ThresholdEntry& at(int id) const;
  ThresholdEntry& at(int id);

  /// Validates the schema: version 1, exactly 25 entries, ids 1..25 once each,
  /// thresholds in [0,1] (or the reject-all value). Throws Error(SchemaMismatch).
  static ThresholdConfig from_json(const std::string& text);
  static ThresholdConfig load(const std::filesystem::path& path);
  std::string to_json() const;
  void save(const std::filesystem::path& path) const;
};

}  // namespace faceqvec
