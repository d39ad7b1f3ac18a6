#pragma once

// Applies frozen thresholds to a labeled corpus and reports per-test accuracy,
// TPR and FPR plus label-balance diagnostics.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "faceqvec/corpus.hpp"
#include "faceqvec/thresholds.hpp"

namespace faceqvec {

struct TestPerformance {
  int id = 0;
  std::string name;
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::size_t n_positive = 0;        // label 1, decided
  std::size_t n_negative = 0;        // label 0, decided
  std::size_t n_not_computable = 0;  // labeled but undetermined
  std::size_t n_unlabeled = 0;       // NA
  std::optional<double> accuracy;
  std::optional<double> tpr;
  std::optional<double> fpr;
  bool consistent = true;
};

struct PerformanceReport {
  std::string corpus_name;
  std::size_t corpus_size = 0;
  std::string date;
  std::vector<TestPerformance> tests;  // 25, id order
};

/// Throws Error(EmptyCorpus) for a corpus without images.
PerformanceReport evaluate(const ScoredCorpus& corpus, const ThresholdConfig& thresholds,
                           const std::string& corpus_name = "", const std::string& date = "");

struct BalanceEntry {
  int id = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  bool underrepresented = false;  // negatives below 5% of labeled total
};

std::vector<BalanceEntry> balance_report(const LabelTable& labels);

/// True when `accuracy` agrees with what (TPR, FPR) imply for the given class
/// counts, within `tolerance` (reported figures are usually rounded).
bool metrics_consistent(double accuracy, double tpr, double fpr, std::size_t positives, std::size_t negatives,
                        double tolerance = 0.02);

std::string report_to_json(const PerformanceReport& r, const std::vector<BalanceEntry>* balance = nullptr);
std::string report_to_text(const PerformanceReport& r, const std::vector<BalanceEntry>* balance = nullptr);

}  // namespace faceqvec
