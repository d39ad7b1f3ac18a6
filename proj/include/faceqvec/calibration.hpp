#pragma once

// ROC analysis and per-test threshold selection.

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "faceqvec/corpus.hpp"
#include "faceqvec/thresholds.hpp"

namespace faceqvec {

struct LabeledSample {
  double score = 0.0;
  int label = 0;  // 1 = compliant
};

struct LabeledScoreSet {
  int test_id = 1;
  std::vector<LabeledSample> entries;
};

struct RocPoint {
  double threshold = 0.0;  // may be +/- infinity for the corner points
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Points ordered by threshold descending, from (0,0) to (1,1).
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Sweeps midpoints between consecutive distinct scores plus +/- infinity.
/// A sample passes a threshold t when score >= t. Throws
/// Error(SingleClassOnly) unless both labels are present.
RocCurve compute_roc(const LabeledScoreSet& s);

/// Trapezoidal area over the FPR axis.
double compute_auc(const RocCurve& c);

struct ThresholdChoice {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Max TPR among points with FPR strictly below max_fpr; ties go to the lowest
/// FPR, then the highest threshold. Throws Error(NoFeasibleThreshold).
ThresholdChoice select_threshold(const RocCurve& c, double max_fpr = 0.5);

enum class PerformanceClass { High, Medium, Low };
std::string_view to_string(PerformanceClass p);
PerformanceClass classify_performance(double auc);

/// Maps an ROC threshold onto the persisted [0,1] range without changing any
/// decision on scores in [0,1].
double persistable_threshold(double t);

struct CalibrationResult {
  ThresholdConfig config;
  std::array<std::optional<RocCurve>, kTestCount> curves;
};

/// Computable scores with non-NA labels, one set per test.
std::vector<LabeledScoreSet> gather_score_sets(const ScoredCorpus& corpus);

/// Calibrates every test; tests without both classes (or with no feasible
/// point) keep threshold 0.5 with provenance default.
CalibrationResult calibrate(const std::vector<LabeledScoreSet>& sets, double max_fpr = 0.5);

/// Throws Error(EmptyCorpus) for a corpus without images.
CalibrationResult calibrate_corpus(const ScoredCorpus& corpus, double max_fpr = 0.5);

}  // namespace faceqvec
