#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "faceqvec/cli.hpp"
#include "faceqvec/corpus.hpp"
#include "faceqvec/image_io.hpp"
#include "faceqvec/synth.hpp"
#include "helpers.hpp"
#include "json.hpp"

using namespace faceqvec;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path write_portrait(const fs::path& dir, const std::string& name, std::uint64_t seed) {
  const Portrait p = render_portrait(seed);
  const fs::path file = dir / name;
  save_image(p.image, file);
  save_annotation(p.annotation, sidecar_path_for(file));
  return file;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream(file, std::ios::binary) << text;
}

// A small synthesized corpus shared by the calibrate/evaluate cases.
const fs::path& small_corpus() {
  static testutil::TempDir dir("cli_corpus");
  static bool built = false;
  if (!built) {
    const fs::path base = dir.path / "base";
    REQUIRE(cli({"portraits", "--out", base.string(), "--count", "4", "--seed", "3"}).code == kExitPass);
    write_text(dir.path / "plan.json", R"([{"kind":"gaussian_blur","severities":[0,3,5],"count":4},
                                          {"kind":"darken","severities":[2],"count":4}])");
    const Run r = cli({"synth", "--plan", (dir.path / "plan.json").string(), "--base", base.string(), "--out",
                       (dir.path / "corpus").string(), "--seed", "1"});
    REQUIRE(r.code == kExitPass);
    built = true;
  }
  return dir.path;
}

}  // namespace

TEST_CASE("assess a clean portrait") {
  const testutil::TempDir dir("cli");
  const fs::path img = write_portrait(dir.path, "face.png", 21);
  const Run r = cli({"assess", img.string(), "--json"});
  CHECK(r.code == kExitPass);
  const json j = json::parse(r.out);
  CHECK(j["version"] == 1);
  CHECK(j["tests"].size() == 25);
  CHECK(j["overall_pass"] == true);
  CHECK(j["hints"].empty());

  const Run text = cli({"assess", img.string()});
  CHECK(text.code == kExitPass);
  CHECK(text.out.find("overall: PASS") != std::string::npos);
}

TEST_CASE("assess a blurred portrait") {
  const testutil::TempDir dir("cli");
  const Portrait p = render_portrait(22);
  const SynthSample s = apply(p.image, {DegradationKind::GaussianBlur, 5.0, 0}, &p.annotation);
  const fs::path img = dir.path / "blur.png";
  save_image(s.image, img);
  save_annotation(p.annotation, sidecar_path_for(img));

  const Run r = cli({"assess", img.string(), "--json"});
  CHECK(r.code == kExitFail);
  const json j = json::parse(r.out);
  CHECK(j["tests"][0]["decision"] == "fail");
  bool hinted = false;
  for (const auto& h : j["hints"]) hinted = hinted || (h["id"] == 1 && h["hint"] == "image is out of focus");
  CHECK(hinted);
  CHECK(remediation_hint(1) == "image is out of focus");
}

TEST_CASE("assess error exits") {
  const testutil::TempDir dir("cli");
  write_text(dir.path / "notes.png", "not an image");
  CHECK(cli({"assess", (dir.path / "notes.png").string()}).code == kExitError);
  CHECK(cli({"assess", (dir.path / "missing.png").string()}).code == kExitError);

  save_image(testutil::solid(160, 160, 60, 90, 170), dir.path / "wall.png");
  const Run none = cli({"assess", (dir.path / "wall.png").string()});
  CHECK(none.code == kExitNoFace);
  CHECK_FALSE(none.err.empty());

  const fs::path img = write_portrait(dir.path, "face.png", 5);
  json th = json::parse(ThresholdConfig::defaults().to_json());
  th["tests"][4]["id"] = 99;
  write_text(dir.path / "bad.json", th.dump());
  CHECK(cli({"assess", img.string(), "--thresholds", (dir.path / "bad.json").string()}).code == kExitError);
}

TEST_CASE("assess output is byte-identical across runs") {
  const testutil::TempDir dir("cli");
  const fs::path img = write_portrait(dir.path, "face.png", 9);
  CHECK(cli({"assess", img.string(), "--json"}).out == cli({"assess", img.string(), "--json"}).out);
}

TEST_CASE("scoring config from the environment") {
  const testutil::TempDir dir("cli");
  const fs::path img = write_portrait(dir.path, "face.png", 13);
  write_text(dir.path / "cfg.json", R"({"blur_variance_ref": 1e9})");
  const Run plain = cli({"assess", img.string(), "--json"});
  ::setenv("FACEQVEC_CONFIG", (dir.path / "cfg.json").string().c_str(), 1);
  const Run env = cli({"assess", img.string(), "--json"});
  ::unsetenv("FACEQVEC_CONFIG");
  const double before = json::parse(plain.out)["tests"][0]["raw_score"];
  const double after = json::parse(env.out)["tests"][0]["raw_score"];
  CHECK(after < before);

  write_text(dir.path / "unknown.json", R"({"nope": 1})");
  CHECK(cli({"assess", img.string(), "--config", (dir.path / "unknown.json").string()}).code == kExitError);
}

TEST_CASE("calibrate and evaluate") {
  const fs::path& root = small_corpus();
  const std::string corpus = (root / "corpus").string(), labels = (root / "corpus" / "labels.csv").string();
  const std::string th = (root / "th.json").string();

  const Run cal = cli({"calibrate", "--corpus", corpus, "--labels", labels, "--out", th, "--max-fpr", "0.1", "--jobs", "2"});
  REQUIRE(cal.code == kExitPass);
  CHECK(cal.out.find("Provenance") != std::string::npos);
  const ThresholdConfig cfg = ThresholdConfig::load(th);
  CHECK(cfg.at(1).provenance == Provenance::Calibrated);
  for (const auto& e : cfg.tests)
    if (e.provenance == Provenance::Calibrated) CHECK(*e.fpr < 0.1);

  const Run ev = cli({"evaluate", "--corpus", corpus, "--labels", labels, "--thresholds", th, "--json", "--date",
                      "2026-01-02"});
  REQUIRE(ev.code == kExitPass);
  const json rep = json::parse(ev.out);
  CHECK(rep["corpus"]["name"] == "corpus");
  CHECK(rep["corpus"]["date"] == "2026-01-02");
  for (const auto& t : rep["tests"]) {
    const auto& e = cfg.at(t["id"].get<int>());
    if (e.provenance != Provenance::Calibrated) continue;
    CHECK(t["tpr"].get<double>() == *e.tpr);
    CHECK(t["fpr"].get<double>() == *e.fpr);
  }

  CHECK(cli({"calibrate", "--corpus", corpus, "--labels", (root / "nope.csv").string(), "--out", th}).code ==
        kExitError);
  CHECK(cli({"evaluate", "--corpus", corpus, "--labels", labels, "--thresholds", (root / "nope.json").string()}).code ==
        kExitError);
}

TEST_CASE("synth seeds and errors") {
  const fs::path& root = small_corpus();
  const testutil::TempDir dir("cli");
  const std::string plan = (root / "plan.json").string(), base = (root / "base").string();
  REQUIRE(cli({"synth", "--plan", plan, "--base", base, "--out", (dir.path / "a").string()}).code == kExitPass);
  REQUIRE(cli({"synth", "--plan", plan, "--base", base, "--out", (dir.path / "b").string(), "--seed", "0"}).code ==
          kExitPass);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(slurp(dir.path / "a" / "labels.csv") == slurp(dir.path / "b" / "labels.csv"));
  for (const LabelRow& row : load_labels(dir.path / "a" / "labels.csv"))
    CHECK(slurp(dir.path / "a" / row.image) == slurp(dir.path / "b" / row.image));

  fs::create_directories(dir.path / "empty");
  CHECK(cli({"synth", "--plan", plan, "--base", (dir.path / "empty").string(), "--out", (dir.path / "c").string()}).code ==
        kExitError);
  write_text(dir.path / "bad_plan.json", R"([{"kind":"sepia","severities":[1],"count":1}])");
  CHECK(cli({"synth", "--plan", (dir.path / "bad_plan.json").string(), "--base", base, "--out",
             (dir.path / "d").string()})
            .code == kExitError);
}

TEST_CASE("usage errors and help") {
  CHECK(cli({}).code == kExitError);
  CHECK(cli({"frobnicate"}).code == kExitError);
  CHECK(cli({"assess"}).code == kExitError);
  CHECK(cli({"calibrate", "--corpus", "x", "--labels", "y", "--out", "z", "--max-fpr", "2"}).code == kExitError);
  const Run help = cli({"--help"});
  CHECK(help.code == kExitPass);
  CHECK(help.out.find("assess") != std::string::npos);
}
