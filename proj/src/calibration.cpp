#include "faceqvec/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "faceqvec/error.hpp"

namespace faceqvec {

RocCurve compute_roc(const LabeledScoreSet& s) {
  std::size_t pos = 0, neg = 0;
  for (const auto& e : s.entries) {
    if (e.label != 0 && e.label != 1) fail(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    (e.label ? pos : neg)++;
  }
  if (pos == 0 || neg == 0)
    fail(ErrorCode::SingleClassOnly, "test " + std::to_string(s.test_id) + " needs both labels to build an ROC curve");

  std::vector<LabeledSample> sorted = s.entries;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score > b.score; });

  const double inf = std::numeric_limits<double>::infinity();
  RocCurve c;
  c.points.push_back({inf, 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    // admit every sample tied at this score together
    const double v = sorted[i].score;
    while (i < sorted.size() && sorted[i].score == v) {
      (sorted[i].label ? tp : fp)++;
      ++i;
    }
    double t = -inf;
    if (i < sorted.size()) {
      const double lower = sorted[i].score;
      t = lower + (v - lower) / 2.0;
      if (!(t > lower)) t = v;
    }
    c.points.push_back({t, static_cast<double>(tp) / pos, static_cast<double>(fp) / neg});
  }
  c.auc = compute_auc(c);
  return c;
}

double compute_auc(const RocCurve& c) {
  double area = 0.0;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    const auto& a = c.points[i - 1];
    const auto& b = c.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return area;
}

ThresholdChoice select_threshold(const RocCurve& c, double max_fpr) {
  const RocPoint* best = nullptr;
  for (const RocPoint& p : c.points) {
    if (!(p.fpr < max_fpr)) continue;
    if (!best || p.tpr > best->tpr || (p.tpr == best->tpr && p.fpr < best->fpr) ||
        (p.tpr == best->tpr && p.fpr == best->fpr && p.threshold > best->threshold))
      best = &p;
  }
  if (!best) fail(ErrorCode::NoFeasibleThreshold, "no ROC point has FPR below " + std::to_string(max_fpr));
  return {best->threshold, best->tpr, best->fpr};
}

std::string_view to_string(PerformanceClass p) {
  switch (p) {
    case PerformanceClass::High: return "High";
    case PerformanceClass::Medium: return "Medium";
    case PerformanceClass::Low: return "Low";
  }
  return "Low";
}

PerformanceClass classify_performance(double auc) {
  if (!(auc >= 0.0 && auc <= 1.0)) fail(ErrorCode::InvalidArgument, "AUC must lie in [0,1]");
  if (auc >= 0.75) return PerformanceClass::High;
  if (auc >= 0.65) return PerformanceClass::Medium;
  return PerformanceClass::Low;
}

double persistable_threshold(double t) {
  if (t > 1.0) return kRejectAllThreshold;
  if (t < 0.0) return 0.0;
  return t;
}

std::vector<LabeledScoreSet> gather_score_sets(const ScoredCorpus& corpus) {
  std::vector<LabeledScoreSet> sets(kTestCount);
  for (int i = 0; i < kTestCount; ++i) sets[i].test_id = i + 1;
  for (const ScoredImage& img : corpus.images) {
    for (int i = 0; i < kTestCount; ++i) {
      const auto& label = img.labels[i];
      const RawScore& raw = img.scores[static_cast<std::size_t>(i)];
      if (label && raw.computable) sets[i].entries.push_back({raw.value, *label});
    }
  }
  return sets;
}

CalibrationResult calibrate(const std::vector<LabeledScoreSet>& sets, double max_fpr) {
  CalibrationResult r;
  r.config = ThresholdConfig::defaults();
  for (const LabeledScoreSet& s : sets) {
    ThresholdEntry& e = r.config.at(s.test_id);
    try {
      RocCurve curve = compute_roc(s);
      const ThresholdChoice choice = select_threshold(curve, max_fpr);
      e.threshold = persistable_threshold(choice.threshold);
      e.provenance = Provenance::Calibrated;
      e.tpr = choice.tpr;
      e.fpr = choice.fpr;
      e.auc = curve.auc;
      r.curves[s.test_id - 1] = std::move(curve);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::SingleClassOnly && err.code() != ErrorCode::NoFeasibleThreshold) throw;
    }
  }
  return r;
}

CalibrationResult calibrate_corpus(const ScoredCorpus& corpus, double max_fpr) {
  if (corpus.images.empty()) fail(ErrorCode::EmptyCorpus, "corpus has no images");
  return calibrate(gather_score_sets(corpus), max_fpr);
}

}  // namespace faceqvec
