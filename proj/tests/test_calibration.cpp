#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "faceqvec/calibration.hpp"
#include "helpers.hpp"

using namespace faceqvec;
using testutil::code_of;

namespace {

LabeledScoreSet make_set(std::initializer_list<std::pair<double, int>> xs) {
  LabeledScoreSet s;
  for (auto [v, l] : xs) s.entries.push_back({v, l});
  return s;
}

LabeledScoreSet random_set(std::mt19937& rng, int n, int levels) {
  LabeledScoreSet s;
  std::uniform_int_distribution<int> q(0, levels);
  for (int i = 0; i < n; ++i) s.entries.push_back({q(rng) / double(levels), int(rng() % 2)});
  s.entries[0].label = 0;
  s.entries[1].label = 1;
  return s;
}

double mann_whitney(const LabeledScoreSet& s) {
  double num = 0.0, pairs = 0.0;
  for (const auto& p : s.entries) {
    if (p.label != 1) continue;
    for (const auto& n : s.entries) {
      if (n.label != 0) continue;
      pairs += 1.0;
      if (p.score > n.score) num += 1.0;
      else if (p.score == n.score) num += 0.5;
    }
  }
  return num / pairs;
}

}  // namespace

TEST_CASE("roc curve shape") {
  const RocCurve perfect = compute_roc(make_set({{0.9, 1}, {0.8, 1}, {0.3, 0}, {0.1, 0}}));
  CHECK(std::any_of(perfect.points.begin(), perfect.points.end(),
                    [](const RocPoint& p) { return p.fpr == 0.0 && p.tpr == 1.0; }));
  CHECK(perfect.auc == 1.0);
  CHECK(perfect.points.front().tpr == 0.0);
  CHECK(perfect.points.front().fpr == 0.0);
  CHECK(perfect.points.back().tpr == 1.0);
  CHECK(perfect.points.back().fpr == 1.0);

  const RocCurve tied = compute_roc(make_set({{0.4, 1}, {0.4, 0}, {0.4, 1}, {0.4, 0}}));
  CHECK(tied.points.size() == 2);
  CHECK(tied.auc == doctest::Approx(0.5));

  const RocCurve four = compute_roc(make_set({{0.9, 1}, {0.8, 0}, {0.7, 1}, {0.1, 0}}));
  const auto it = std::find_if(four.points.begin(), four.points.end(),
                               [](const RocPoint& p) { return std::abs(p.threshold - 0.75) < 1e-12; });
  REQUIRE(it != four.points.end());
  CHECK(it->tpr == 0.5);
  CHECK(it->fpr == 0.5);

  CHECK(code_of([] { compute_roc(make_set({{0.1, 1}, {0.2, 1}})); }) == ErrorCode::SingleClassOnly);
}

TEST_CASE("roc is monotone and auc equals the pairwise statistic") {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const LabeledScoreSet s = random_set(rng, 2 + static_cast<int>(rng() % 150), 1 + static_cast<int>(rng() % 30));
    const RocCurve c = compute_roc(s);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      CHECK(c.points[i].threshold < c.points[i - 1].threshold);
      CHECK(c.points[i].tpr >= c.points[i - 1].tpr);
      CHECK(c.points[i].fpr >= c.points[i - 1].fpr);
    }
    CHECK(std::abs(c.auc - mann_whitney(s)) <= 1e-9);
    CHECK(compute_auc(c) == c.auc);
  }
}

TEST_CASE("shuffled labels give chance-level auc") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    LabeledScoreSet s;
    for (int i = 0; i < 400; ++i) s.entries.push_back({u(rng), int(rng() % 2)});
    CHECK(std::abs(compute_roc(s).auc - 0.5) <= 0.1);
  }
}

TEST_CASE("threshold selection") {
  SUBCASE("perfect separation") {
    const ThresholdChoice c = select_threshold(compute_roc(make_set({{0.9, 1}, {0.8, 1}, {0.3, 0}, {0.1, 0}})));
    CHECK(c.tpr == 1.0);
    CHECK(c.fpr == 0.0);
    CHECK(c.threshold > 0.3);
    CHECK(c.threshold < 0.8);
  }
  SUBCASE("four-point set") {
    const ThresholdChoice c = select_threshold(compute_roc(make_set({{0.9, 1}, {0.8, 0}, {0.7, 1}, {0.1, 0}})));
    // FPR 0.5 is infeasible under the strict bound, so the best is TPR 0.5 at FPR 0
    CHECK(c.tpr == 0.5);
    CHECK(c.fpr == 0.0);
    CHECK(c.threshold == doctest::Approx(0.85));
  }
  SUBCASE("inverted scores") {
    const ThresholdChoice c = select_threshold(compute_roc(make_set({{0.9, 0}, {0.8, 0}, {0.2, 1}, {0.1, 1}})));
    CHECK(c.tpr == 0.0);
    CHECK(c.fpr == 0.0);
  }
  SUBCASE("no feasible point") {
    const RocCurve c = compute_roc(make_set({{0.9, 1}, {0.1, 0}}));
    CHECK(code_of([&] { select_threshold(c, 0.0); }) == ErrorCode::NoFeasibleThreshold);
  }
}

TEST_CASE("selection matches exhaustive search") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const LabeledScoreSet s = random_set(rng, 2 + static_cast<int>(rng() % 120), 1 + static_cast<int>(rng() % 20));
    const ThresholdChoice got = select_threshold(compute_roc(s), 0.5);
    std::vector<double> cands{-1.0, 2.0};
    for (const auto& e : s.entries) cands.push_back(e.score);
    double P = 0, N = 0;
    for (const auto& e : s.entries) (e.label ? P : N) += 1;
    double best_tpr = -1, best_fpr = 2;
    for (double t : cands) {
      double tp = 0, fp = 0;
      for (const auto& e : s.entries)
        if (e.score >= t) (e.label ? tp : fp) += 1;
      const double tpr = tp / P, fpr = fp / N;
      if (fpr >= 0.5) continue;
      if (tpr > best_tpr || (tpr == best_tpr && fpr < best_fpr)) {
        best_tpr = tpr;
        best_fpr = fpr;
      }
    }
    CHECK(got.tpr == best_tpr);
    CHECK(got.fpr == best_fpr);
  }
}

TEST_CASE("performance classes") {
  CHECK(classify_performance(0.87) == PerformanceClass::High);
  CHECK(classify_performance(0.75) == PerformanceClass::High);
  CHECK(classify_performance(0.749) == PerformanceClass::Medium);
  CHECK(classify_performance(0.65) == PerformanceClass::Medium);
  CHECK(classify_performance(0.649) == PerformanceClass::Low);
  CHECK(classify_performance(0.62) == PerformanceClass::Low);
  CHECK(to_string(PerformanceClass::Medium) == "Medium");
  CHECK(code_of([] { classify_performance(1.2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("persisted thresholds keep decisions") {
  CHECK(persistable_threshold(std::numeric_limits<double>::infinity()) == kRejectAllThreshold);
  CHECK(persistable_threshold(-std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(persistable_threshold(0.3) == 0.3);
}

TEST_CASE("calibrate_corpus") {
  ScoredCorpus corpus;
  for (int i = 0; i < 40; ++i) {
    ScoredImage img;
    img.image = "img" + std::to_string(100 + i) + ".png";
    img.scores.assign(25, RawScore::of(0.5));
    const bool good = i % 2 == 0;
    img.labels[0] = good ? 1 : 0;
    img.scores[0] = RawScore::of(good ? 0.8 + 0.001 * i : 0.2 + 0.001 * i);
    img.labels[12] = 1;  // test 13: positives only
    img.labels[4] = good ? 1 : 0;
    img.scores[4] = i < 4 ? RawScore::not_computable("x") : RawScore::of(good ? 0.6 : 0.4);
    corpus.images.push_back(img);
  }
  const CalibrationResult r = calibrate_corpus(corpus);
  CHECK(r.config.at(1).provenance == Provenance::Calibrated);
  CHECK(r.config.at(1).tpr == 1.0);
  CHECK(r.config.at(1).fpr == 0.0);
  REQUIRE(r.config.at(1).auc);
  CHECK(*r.config.at(1).auc == 1.0);
  CHECK(r.config.at(13).provenance == Provenance::Default);
  CHECK(r.config.at(13).threshold == 0.5);
  CHECK_FALSE(r.curves[12].has_value());
  CHECK(r.config.at(5).provenance == Provenance::Calibrated);
  CHECK(r.config.at(2).provenance == Provenance::Default);

  const auto sets = gather_score_sets(corpus);
  CHECK(sets[4].entries.size() == 36);

  CHECK(calibrate_corpus(corpus).config.to_json() == r.config.to_json());
  CHECK(code_of([] { calibrate_corpus(ScoredCorpus{}); }) == ErrorCode::EmptyCorpus);
}
