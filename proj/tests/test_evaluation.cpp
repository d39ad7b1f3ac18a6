#include <cmath>
#include <random>

#include "doctest.h"
#include "faceqvec/calibration.hpp"
#include "faceqvec/evaluation.hpp"
#include "helpers.hpp"
#include "json.hpp"

using namespace faceqvec;
using testutil::code_of;

namespace {

ScoredCorpus four_images() {
  ScoredCorpus c;
  const double scores[4] = {0.9, 0.9, 0.1, 0.1};
  const int labels[4] = {1, 0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    ScoredImage img;
    img.image = "i" + std::to_string(i) + ".png";
    img.scores.assign(25, RawScore::not_computable("n/a"));
    img.scores[2] = RawScore::of(scores[i]);
    img.labels[2] = labels[i];
    img.labels[0] = 1;
    c.images.push_back(img);
  }
  return c;
}

}  // namespace

TEST_CASE("hand-counted confusion matrix") {
  const PerformanceReport r = evaluate(four_images(), ThresholdConfig::defaults(), "hand", "2026-01-01");
  REQUIRE(r.tests.size() == 25);
  const TestPerformance& t = r.tests[2];
  CHECK(t.tp == 1);
  CHECK(t.fp == 1);
  CHECK(t.tn == 2);
  CHECK(t.fn == 0);
  CHECK(*t.accuracy == doctest::Approx(0.75));
  CHECK(*t.tpr == 1.0);
  CHECK(*t.fpr == doctest::Approx(1.0 / 3.0));
  CHECK(t.consistent);

  const TestPerformance& nc = r.tests[0];
  CHECK(nc.n_not_computable == 4);
  CHECK_FALSE(nc.accuracy);
  CHECK_FALSE(nc.tpr);
  CHECK(r.tests[5].n_unlabeled == 4);
}

TEST_CASE("perfect decisions give accuracy 1") {
  ScoredCorpus c = four_images();
  c.images[1].scores[2] = RawScore::of(0.2);
  CHECK(*evaluate(c, ThresholdConfig::defaults()).tests[2].accuracy == 1.0);
}

TEST_CASE("tallies are conserved per test") {
  const ScoredCorpus c = four_images();
  for (const auto& t : evaluate(c, ThresholdConfig::defaults()).tests)
    CHECK(t.tp + t.tn + t.fp + t.fn + t.n_not_computable + t.n_unlabeled == c.images.size());
  CHECK(code_of([] { evaluate(ScoredCorpus{}, ThresholdConfig::defaults()); }) == ErrorCode::EmptyCorpus);
}

TEST_CASE("evaluating with calibrated thresholds reproduces the recorded rates") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScoredCorpus c;
  for (int i = 0; i < 120; ++i) {
    ScoredImage img;
    img.image = "x" + std::to_string(1000 + i);
    img.scores.resize(25);
    for (int t = 0; t < 25; ++t) {
      const int label = static_cast<int>(rng() % 2);
      img.labels[static_cast<std::size_t>(t)] = rng() % 7 == 0 ? std::nullopt : std::optional<int>(label);
      img.scores[static_cast<std::size_t>(t)] = RawScore::of(std::round((0.3 * label + 0.7 * u(rng)) * 20) / 20);
    }
    c.images.push_back(img);
  }
  const CalibrationResult cal = calibrate_corpus(c);
  const PerformanceReport r = evaluate(c, cal.config);
  for (int id = 1; id <= 25; ++id) {
    const auto& e = cal.config.at(id);
    if (e.provenance != Provenance::Calibrated) continue;
    CHECK(*r.tests[static_cast<std::size_t>(id - 1)].tpr == *e.tpr);
    CHECK(*r.tests[static_cast<std::size_t>(id - 1)].fpr == *e.fpr);
  }
  // the same holds after a save/load round trip
  const ThresholdConfig back = ThresholdConfig::from_json(cal.config.to_json());
  const PerformanceReport r2 = evaluate(c, back);
  for (int i = 0; i < 25; ++i) CHECK(r2.tests[static_cast<std::size_t>(i)].tpr == r.tests[static_cast<std::size_t>(i)].tpr);
}

TEST_CASE("label balance") {
  LabelTable t;
  for (int i = 0; i < 1062; ++i) {
    LabelRow row;
    row.image = std::to_string(i);
    row.labels[13] = i < 31 ? 0 : 1;          // test 14: 31 negatives of 1062
    row.labels[0] = i % 2;                    // balanced
    row.labels[1] = 1;                        // no negatives
    t.push_back(row);
  }
  const auto b = balance_report(t);
  CHECK(b[13].negative == 31);
  CHECK(b[13].underrepresented);
  CHECK_FALSE(b[0].underrepresented);
  CHECK(b[1].underrepresented);
  CHECK(b[2].underrepresented);  // unlabeled
}

TEST_CASE("report consistency check") {
  CHECK_FALSE(metrics_consistent(0.93, 0.0, 1.0, 332, 22));
  CHECK(metrics_consistent(0.75, 1.0, 1.0 / 3.0, 1, 3));
}

TEST_CASE("report formats") {
  const ScoredCorpus c = four_images();
  const PerformanceReport r = evaluate(c, ThresholdConfig::defaults(), "hand", "2026-01-01");
  const auto j = nlohmann::json::parse(report_to_json(r));
  CHECK(j["version"] == 1);
  CHECK(j["corpus"]["name"] == "hand");
  CHECK(j["corpus"]["size"] == 4);
  CHECK(j["tests"].size() == 25);
  CHECK(j["tests"][0]["accuracy"].is_null());
  CHECK(j["tests"][2]["tp"] == 1);

  LabelTable labels;
  for (const auto& img : c.images) labels.push_back({img.image, img.labels});
  const auto bal = balance_report(labels);
  const std::string text = report_to_text(r, &bal);
  CHECK(text.find("Accuracy") != std::string::npos);
  CHECK(text.find("TPR") != std::string::npos);
  CHECK(text.find("FPR") != std::string::npos);
  CHECK(text.find("0.75") != std::string::npos);
  CHECK(text.find("(few negatives)") != std::string::npos);
}
