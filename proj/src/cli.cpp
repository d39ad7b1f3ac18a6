#include "faceqvec/cli.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>

#include "CLI11.hpp"
#include "json.hpp"

#include "faceqvec/error.hpp"
#include "faceqvec/evaluation.hpp"
#include "faceqvec/image_io.hpp"
#include "faceqvec/synth.hpp"

namespace faceqvec {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, kTestCount> kHints{
    "image is out of focus",
    "look straight at the camera",
    "remove ink marks from the photo",
    "skin colour looks unnatural; check the white balance",
    "lighting is too dark or too bright",
    "contrast is too low",
    "image is pixelated; use a higher resolution",
    "keep hair away from the face and eyes",
    "keep both eyes open",
    "use a plain, uniform background",
    "face the camera with the head upright",
    "avoid light reflections on the skin",
    "red eyes detected; avoid direct flash",
    "remove shadows from the background",
    "light the face evenly to avoid shadows",
    "remove sunglasses",
    "avoid reflections on the glasses",
    "glasses frames are too wide",
    "glasses frames cover the eyes",
    "remove the hat",
    "remove the veil",
    "keep the mouth closed",
    "only one face may appear in the photo",
    "image is noisy",
    "keep a neutral expression",
};

std::string format_double(double v, const char* spec) {
  char buf[32];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string today_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[16];
  std::strftime(buf, sizeof buf, "%Y-%m-%d", &tm);
  return buf;
}

// --config wins, then FACEQVEC_CONFIG, then built-in defaults.
ScoringConfig resolve_config(const std::string& flag) {
  if (!flag.empty()) return ScoringConfig::load(flag);
  if (const char* env = std::getenv("FACEQVEC_CONFIG"); env && *env) return ScoringConfig::load(env);
  return {};
}

CorpusOptions corpus_options(const std::string& config, int jobs) {
  CorpusOptions o;
  o.env.config = resolve_config(config);
  o.jobs = std::max(1, jobs);
  return o;
}

}  // namespace

std::string_view remediation_hint(int test_id) {
  if (test_id < 1 || test_id > kTestCount) fail(ErrorCode::InvalidArgument, "test id out of range");
  return kHints[static_cast<std::size_t>(test_id - 1)];
}

AssessReport assess_image(const fs::path& image, const ThresholdConfig& thresholds, const ScoringEnv& env,
                          const std::optional<Annotation>& annotation, const PreprocessConfig& cfg) {
  const ImageBuffer img = load_image(image);
  std::optional<Annotation> ann = annotation ? annotation : find_annotation(image);
  const FaceContext ctx = preprocess(img, cfg, ann ? &*ann : nullptr);
  AssessReport r;
  r.image = image.string();
  r.vector = run_all(ctx, TestRegistry::standard(), thresholds, env);
  r.overall_pass = r.vector.overall_pass();
  return r;
}

std::string assess_to_json(const AssessReport& r) {
  json tests = json::array();
  json undetermined = json::array();
  json hints = json::array();
  for (const QualityEntry& e : r.vector.entries) {
    json o = json::object();
    o["id"] = e.id;
    o["name"] = e.name;
    o["raw_score"] = e.raw.computable ? json(e.raw.value) : json(nullptr);
    o["threshold"] = e.threshold;
    o["decision"] = std::string(to_string(e.decision));
    if (!e.raw.computable) o["reason"] = e.raw.reason;
    tests.push_back(std::move(o));
    if (e.decision == Decision::Undetermined) undetermined.push_back(e.id);
    if (e.decision == Decision::Fail) hints.push_back({{"id", e.id}, {"hint", std::string(remediation_hint(e.id))}});
  }
  json j = json::object();
  j["version"] = 1;
  j["image"] = r.image;
  j["overall_pass"] = r.overall_pass;
  j["tests"] = std::move(tests);
  j["undetermined"] = std::move(undetermined);
  j["hints"] = std::move(hints);
  return j.dump(2) + "\n";
}

std::string assess_to_text(const AssessReport& r) {
  std::string out = "image: " + r.image + "\n";
  out += std::string("overall: ") + (r.overall_pass ? "PASS" : "FAIL") + "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-4s %-30s %7s %9s  %s\n", "Test", "Name", "Score", "Threshold", "Decision");
  out += line;
  std::vector<int> undetermined;
  for (const QualityEntry& e : r.vector.entries) {
    const std::string score = e.raw.computable ? format_double(e.raw.value, "%.3f") : "n/a";
    std::snprintf(line, sizeof line, "%-4d %-30s %7s %9.3f  %s\n", e.id, e.name.c_str(), score.c_str(), e.threshold,
                  std::string(to_string(e.decision)).c_str());
    out += line;
    if (e.decision == Decision::Undetermined) undetermined.push_back(e.id);
  }
  if (!undetermined.empty()) {
    out += "undetermined:";
    for (int id : undetermined) out += " " + std::to_string(id);
    out += "\n";
  }
  for (const QualityEntry& e : r.vector.entries)
    if (e.decision == Decision::Fail) out += "hint [" + std::to_string(e.id) + "]: " + std::string(remediation_hint(e.id)) + "\n";
  return out;
}

std::string calibration_table(const CalibrationResult& r) {
  const TestRegistry& reg = TestRegistry::standard();
  std::string out;
  char line[200];
  std::snprintf(line, sizeof line, "%-4s %-30s %6s %-7s %9s %6s %6s  %s\n", "Test", "Name", "AUC", "Class", "Threshold",
                "TPR", "FPR", "Provenance");
  out += line;
  for (int id = 1; id <= kTestCount; ++id) {
    const ThresholdEntry& t = r.config.at(id);
    const auto& curve = r.curves[static_cast<std::size_t>(id - 1)];
    const std::string auc = curve ? format_double(curve->auc, "%.3f") : "n/a";
    const std::string cls = curve ? std::string(to_string(classify_performance(curve->auc))) : "-";
    const std::string tpr = t.tpr ? format_double(*t.tpr, "%.2f") : "n/a";
    const std::string fpr = t.fpr ? format_double(*t.fpr, "%.2f") : "n/a";
    std::snprintf(line, sizeof line, "%-4d %-30s %6s %-7s %9.3f %6s %6s  %s\n", id, std::string(reg.at(id).name).c_str(),
                  auc.c_str(), cls.c_str(), t.threshold, tpr.c_str(), fpr.c_str(),
                  t.provenance == Provenance::Calibrated ? "calibrated" : "default");
    out += line;
  }
  return out;
}

int exit_code_for(const Error& e) { return e.code() == ErrorCode::NoFaceDetected ? kExitNoFace : kExitError; }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Face image compliance vector: assess, calibrate, evaluate, synthesize", "faceqvec"};
  app.require_subcommand(1);

  std::string image, thresholds_path, landmarks_path, config_path;
  bool as_json = false;
  auto* assess = app.add_subcommand("assess", "Score one image against the 25 tests");
  assess->add_option("image", image, "Image file (PNG or JPEG)")->required();
  assess->add_option("--thresholds", thresholds_path, "Threshold file (defaults to 0.5 for every test)");
  assess->add_option("--landmarks", landmarks_path, "Annotation file overriding the image sidecar");
  assess->add_option("--config", config_path, "Scoring config (default: $FACEQVEC_CONFIG)");
  assess->add_flag("--json", as_json, "Print the JSON report");

  std::string corpus, labels, out_path, date;
  double max_fpr = 0.5;
  std::uint64_t seed = 0;
  int jobs = 1;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Select per-test thresholds from a labeled corpus");
  calibrate_cmd->add_option("--corpus", corpus, "Corpus directory")->required();
  calibrate_cmd->add_option("--labels", labels, "Label CSV")->required();
  calibrate_cmd->add_option("--out", out_path, "Threshold file to write")->required();
  calibrate_cmd->add_option("--max-fpr", max_fpr, "FPR ceiling (strict)")->check(CLI::Range(0.0, 1.0));
  calibrate_cmd->add_option("--seed", seed, "Seed for the background clustering");
  calibrate_cmd->add_option("--jobs", jobs, "Worker threads");
  calibrate_cmd->add_option("--config", config_path, "Scoring config (default: $FACEQVEC_CONFIG)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Report accuracy, TPR and FPR under fixed thresholds");
  evaluate_cmd->add_option("--corpus", corpus, "Corpus directory")->required();
  evaluate_cmd->add_option("--labels", labels, "Label CSV")->required();
  evaluate_cmd->add_option("--thresholds", thresholds_path, "Threshold file")->required();
  evaluate_cmd->add_option("--jobs", jobs, "Worker threads");
  evaluate_cmd->add_option("--config", config_path, "Scoring config (default: $FACEQVEC_CONFIG)");
  evaluate_cmd->add_option("--date", date, "Date recorded in the report (default: today, UTC)");
  evaluate_cmd->add_flag("--json", as_json, "Print the JSON report");

  std::string plan_path, base_dir;
  auto* synth_cmd = app.add_subcommand("synth", "Build a degraded corpus with labels known by construction");
  synth_cmd->add_option("--plan", plan_path, "Plan file")->required();
  synth_cmd->add_option("--base", base_dir, "Directory of base images")->required();
  synth_cmd->add_option("--out", out_path, "Output directory")->required();
  synth_cmd->add_option("--seed", seed, "Seed (default 0)");

  int count = 10;
  auto* portraits_cmd = app.add_subcommand("portraits", "Render synthetic base portraits with sidecars");
  portraits_cmd->add_option("--out", out_path, "Output directory")->required();
  portraits_cmd->add_option("--count", count, "Number of portraits")->check(CLI::PositiveNumber);
  portraits_cmd->add_option("--seed", seed, "Seed (default 0)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (assess->parsed()) {
      const ThresholdConfig th = thresholds_path.empty() ? ThresholdConfig::defaults() : ThresholdConfig::load(thresholds_path);
      ScoringEnv env;
      env.config = resolve_config(config_path);
      std::optional<Annotation> ann;
      if (!landmarks_path.empty()) ann = load_annotation(landmarks_path);
      const AssessReport r = assess_image(image, th, env, ann);
      out << (as_json ? assess_to_json(r) : assess_to_text(r));
      return r.overall_pass ? kExitPass : kExitFail;
    }
    if (calibrate_cmd->parsed()) {
      CorpusOptions opts = corpus_options(config_path, jobs);
      opts.env.config.kmeans_seed = seed;
      const ScoredCorpus scored = score_corpus(corpus, load_labels(labels), opts);
      const CalibrationResult r = calibrate_corpus(scored, max_fpr);
      r.config.save(out_path);
      out << calibration_table(r);
      return kExitPass;
    }
    if (evaluate_cmd->parsed()) {
      const ThresholdConfig th = ThresholdConfig::load(thresholds_path);
      const LabelTable table = load_labels(labels);
      const ScoredCorpus scored = score_corpus(corpus, table, corpus_options(config_path, jobs));
      const std::string name = fs::path(corpus).lexically_normal().filename().string();
      const PerformanceReport r = evaluate(scored, th, name.empty() ? corpus : name, date.empty() ? today_utc() : date);
      const std::vector<BalanceEntry> balance = balance_report(table);
      out << (as_json ? report_to_json(r, &balance) + "\n" : report_to_text(r, &balance));
      return kExitPass;
    }
    if (synth_cmd->parsed()) {
      const auto plan = load_plan(plan_path);
      const auto bases = load_base_images(base_dir);
      const CorpusSummary s = build_corpus(bases, plan, seed, out_path);
      out << "wrote " << s.degraded << " degraded and " << s.clean << " clean images to " << out_path << "\n";
      return kExitPass;
    }
    if (portraits_cmd->parsed()) {
      fs::create_directories(out_path);
      for (int i = 0; i < count; ++i) {
        const Portrait p = render_portrait(hash_counter(seed, static_cast<std::uint64_t>(i)));
        char name[32];
        std::snprintf(name, sizeof name, "portrait_%03d.png", i);
        const fs::path file = fs::path(out_path) / name;
        save_image(p.image, file);
        save_annotation(p.annotation, sidecar_path_for(file));
      }
      out << "wrote " << count << " portraits to " << out_path << "\n";
      return kExitPass;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace faceqvec
