#pragma once

// Labeled corpora on disk: the label CSV shared by synth, calibration and
// evaluation, and parallel per-image scoring.

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "faceqvec/preprocess.hpp"
#include "faceqvec/quality_tests.hpp"

namespace faceqvec {

/// One CSV row: `image,t1,...,t25` with values 0, 1 or NA (nullopt).
struct LabelRow {
  std::string image;  // relative to the corpus directory
  std::array<std::optional<int>, kTestCount> labels{};
};

using LabelTable = std::vector<LabelRow>;

/// Throws Error(SchemaMismatch) on a bad header, field count, value or a
/// duplicated image path.
LabelTable parse_labels(const std::string& csv);
LabelTable load_labels(const std::filesystem::path& path);
std::string format_labels(const LabelTable& table);
void save_labels(const LabelTable& table, const std::filesystem::path& path);

/// Runs fn(0..n-1) on up to `jobs` threads. If any call throws, the exception
/// of the lowest index is rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

struct ScoredImage {
  std::string image;
  std::array<std::optional<int>, kTestCount> labels{};
  std::vector<RawScore> scores;  // registry order, always 25
  bool face_found = true;
};

struct ScoredCorpus {
  std::vector<ScoredImage> images;  // sorted by image path
};

struct CorpusOptions {
  PreprocessConfig preprocess;
  ScoringEnv env;
  int jobs = 1;
};

/// Loads, preprocesses (honouring per-image sidecars) and scores one image.
/// An image without a detectable face yields 25 NotComputable scores.
ScoredImage score_image(const std::filesystem::path& path, const CorpusOptions& opts);

/// Throws Error(EmptyCorpus) when the label table has no rows and
/// Error(IOFailure) when a listed image cannot be read.
ScoredCorpus score_corpus(const std::filesystem::path& dir, const LabelTable& labels, const CorpusOptions& opts);

}  // namespace faceqvec
