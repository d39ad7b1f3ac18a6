#include "faceqvec/thresholds.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "faceqvec/error.hpp"

namespace faceqvec {

using nlohmann::json;

ThresholdConfig ThresholdConfig::defaults() {
  ThresholdConfig c;
  for (int i = 0; i < kTestCount; ++i) c.tests[i].id = i + 1;
  return c;
}

const ThresholdEntry& ThresholdConfig::at(int id) const {
  if (id < 1 || id > kTestCount) fail(ErrorCode::InvalidArgument, "test id out of range: " + std::to_string(id));
  return tests[static_cast<std::size_t>(id - 1)];
}

ThresholdEntry& ThresholdConfig::at(int id) {
  return const_cast<ThresholdEntry&>(static_cast<const ThresholdConfig&>(*this).at(id));
}

namespace {

[[noreturn]] void bad(const std::string& what) { fail(ErrorCode::SchemaMismatch, "thresholds: " + what); }

std::optional<double> optional_rate(const json& e, const char* key) {
  if (!e.contains(key) || e[key].is_null()) return std::nullopt;
  if (!e[key].is_number()) bad(std::string(key) + " must be a number or null");
  const double v = e[key].get<double>();
  if (!(v >= 0.0 && v <= 1.0)) bad(std::string(key) + " outside [0,1]");
  return v;
}

}  // namespace

ThresholdConfig ThresholdConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(e.what());
  }
  if (!j.is_object()) bad("top level must be an object");
  for (const auto& [k, _] : j.items())
    if (k != "version" && k != "tests") bad("unknown key " + k);
  if (!j.contains("version") || j["version"] != 1) bad("version must be 1");
  if (!j.contains("tests") || !j["tests"].is_array()) bad("tests must be an array");
  const json& arr = j["tests"];
  if (arr.size() != static_cast<std::size_t>(kTestCount)) bad("expected exactly 25 entries");

  ThresholdConfig c = defaults();
  std::array<bool, kTestCount> seen{};
  for (const json& e : arr) {
    if (!e.is_object()) bad("entry must be an object");
    for (const auto& [k, _] : e.items())
      if (k != "id" && k != "threshold" && k != "provenance" && k != "tpr" && k != "fpr" && k != "auc")
        bad("unknown entry key " + k);
    if (!e.contains("id") || !e["id"].is_number_integer()) bad("id must be an integer");
    const int id = e["id"].get<int>();
    if (id < 1 || id > kTestCount) bad("id out of range");
    if (seen[id - 1]) bad("duplicate id " + std::to_string(id));
    seen[id - 1] = true;
    if (!e.contains("threshold") || !e["threshold"].is_number()) bad("threshold must be a number");
    const double t = e["threshold"].get<double>();
    if (!((t >= 0.0 && t <= 1.0) || t == kRejectAllThreshold)) bad("threshold outside [0,1]");
    ThresholdEntry& out = c.at(id);
    out.threshold = t;
    const std::string prov = e.value("provenance", std::string("default"));
    if (prov == "calibrated")
      out.provenance = Provenance::Calibrated;
    else if (prov == "default")
      out.provenance = Provenance::Default;
    else
      bad("provenance must be calibrated or default");
    out.tpr = optional_rate(e, "tpr");
    out.fpr = optional_rate(e, "fpr");
    out.auc = optional_rate(e, "auc");
  }
  return c;
}

ThresholdConfig ThresholdConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IOFailure, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string ThresholdConfig::to_json() const {
  json arr = json::array();
  for (const ThresholdEntry& e : tests) {
    json o = json::object();
    o["id"] = e.id;
    o["threshold"] = e.threshold;
    o["provenance"] = e.provenance == Provenance::Calibrated ? "calibrated" : "default";
    o["tpr"] = e.tpr ? json(*e.tpr) : json(nullptr);
    o["fpr"] = e.fpr ? json(*e.fpr) : json(nullptr);
    if (e.auc) o["auc"] = *e.auc;
    arr.push_back(std::move(o));
  }
  json j = json::object();
  j["version"] = 1;
  j["tests"] = std::move(arr);
  return j.dump(2);
}

void ThresholdConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IOFailure, "cannot write " + path.string());
  out << to_json() << '\n';
  if (!out) fail(ErrorCode::IOFailure, "cannot write " + path.string());
}

}  // namespace faceqvec
