#include "faceqvec/evaluation.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "faceqvec/error.hpp"
#include "faceqvec/quality_tests.hpp"

namespace faceqvec {

using nlohmann::json;

PerformanceReport evaluate(const ScoredCorpus& corpus, const ThresholdConfig& thresholds, const std::string& corpus_name,
                           const std::string& date) {
  if (corpus.images.empty()) fail(ErrorCode::EmptyCorpus, "corpus has no images");
  PerformanceReport r;
  r.corpus_name = corpus_name;
  r.corpus_size = corpus.images.size();
  r.date = date;
  const TestRegistry& reg = TestRegistry::standard();
  for (int id = 1; id <= kTestCount; ++id) {
    TestPerformance t;
    t.id = id;
    t.name = std::string(reg.at(id).name);
    const double th = thresholds.at(id).threshold;
    for (const ScoredImage& img : corpus.images) {
      const auto& label = img.labels[id - 1];
      if (!label) {
        ++t.n_unlabeled;
        continue;
      }
      const Decision d = decide(img.scores[static_cast<std::size_t>(id - 1)], th);
      if (d == Decision::Undetermined) {
        ++t.n_not_computable;
        continue;
      }
      const bool pass = d == Decision::Pass;
      if (*label == 1) {
        ++t.n_positive;
        (pass ? t.tp : t.fn)++;
      } else {
        ++t.n_negative;
        (pass ? t.fp : t.tn)++;
      }
    }
    const std::size_t decided = t.tp + t.tn + t.fp + t.fn;
    if (decided > 0) t.accuracy = static_cast<double>(t.tp + t.tn) / static_cast<double>(decided);
    if (t.tp + t.fn > 0) t.tpr = static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fn);
    if (t.fp + t.tn > 0) t.fpr = static_cast<double>(t.fp) / static_cast<double>(t.fp + t.tn);
    if (t.accuracy && t.tpr && t.fpr)
      t.consistent = metrics_consistent(*t.accuracy, *t.tpr, *t.fpr, t.n_positive, t.n_negative, 1e-9);
    r.tests.push_back(std::move(t));
  }
  return r;
}

std::vector<BalanceEntry> balance_report(const LabelTable& labels) {
  std::vector<BalanceEntry> out(kTestCount);
  for (int i = 0; i < kTestCount; ++i) out[i].id = i + 1;
  for (const LabelRow& row : labels)
    for (int i = 0; i < kTestCount; ++i)
      if (row.labels[i]) (*row.labels[i] ? out[i].positive : out[i].negative)++;
  for (auto& b : out) {
    const std::size_t total = b.positive + b.negative;
    b.underrepresented = total == 0 || static_cast<double>(b.negative) < 0.05 * static_cast<double>(total);
  }
  return out;
}

bool metrics_consistent(double accuracy, double tpr, double fpr, std::size_t positives, std::size_t negatives,
                        double tolerance) {
  const double total = static_cast<double>(positives + negatives);
  if (total <= 0.0) return true;
  const double implied = (tpr * static_cast<double>(positives) + (1.0 - fpr) * static_cast<double>(negatives)) / total;
  return std::abs(implied - accuracy) <= tolerance;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fmt(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

}  // namespace

std::string report_to_json(const PerformanceReport& r, const std::vector<BalanceEntry>* balance) {
  json tests = json::array();
  for (const auto& t : r.tests) {
    json o = json::object();
    o["id"] = t.id;
    o["name"] = t.name;
    o["accuracy"] = opt(t.accuracy);
    o["tpr"] = opt(t.tpr);
    o["fpr"] = opt(t.fpr);
    o["tp"] = t.tp;
    o["tn"] = t.tn;
    o["fp"] = t.fp;
    o["fn"] = t.fn;
    o["n_positive"] = t.n_positive;
    o["n_negative"] = t.n_negative;
    o["n_not_computable"] = t.n_not_computable;
    o["n_unlabeled"] = t.n_unlabeled;
    o["consistent"] = t.consistent;
    if (balance) o["underrepresented"] = (*balance)[static_cast<std::size_t>(t.id - 1)].underrepresented;
    tests.push_back(std::move(o));
  }
  json j = json::object();
  j["version"] = 1;
  j["corpus"] = {{"name", r.corpus_name}, {"size", r.corpus_size}, {"date", r.date}};
  j["tests"] = std::move(tests);
  return j.dump(2);
}

std::string report_to_text(const PerformanceReport& r, const std::vector<BalanceEntry>* balance) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "corpus: %s  images: %zu  date: %s\n", r.corpus_name.c_str(), r.corpus_size,
                r.date.c_str());
  out += line;
  std::snprintf(line, sizeof line, "%-4s %-30s %8s %6s %6s %6s %6s %6s\n", "Test", "Name", "Accuracy", "TPR", "FPR",
                "Pos", "Neg", "N/C");
  out += line;
  for (const auto& t : r.tests) {
    const bool flag = balance && (*balance)[static_cast<std::size_t>(t.id - 1)].underrepresented;
    std::snprintf(line, sizeof line, "%-4d %-30s %8s %6s %6s %6zu %6zu %6zu%s\n", t.id, t.name.c_str(),
                  fmt(t.accuracy).c_str(), fmt(t.tpr).c_str(), fmt(t.fpr).c_str(), t.n_positive, t.n_negative,
                  t.n_not_computable, flag ? "  (few negatives)" : "");
    out += line;
  }
  return out;
}

}  // namespace faceqvec
