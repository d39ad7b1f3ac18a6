#include "faceqvec/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "faceqvec/error.hpp"
#include "faceqvec/image_io.hpp"
#include "faceqvec/sidecar.hpp"

namespace faceqvec {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string header_line() {
  std::string h = "image";
  for (int i = 1; i <= kTestCount; ++i) h += ",t" + std::to_string(i);
  return h;
}

}  // namespace

LabelTable parse_labels(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  auto next = [&]() {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next() || line != header_line()) fail(ErrorCode::SchemaMismatch, "labels: header must be image,t1,...,t25");
  LabelTable table;
  std::set<std::string> seen;
  int lineno = 1;
  while (next()) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = "labels line " + std::to_string(lineno);
    if (fields.size() != static_cast<std::size_t>(kTestCount) + 1) fail(ErrorCode::SchemaMismatch, where + ": expected 26 fields");
    LabelRow row;
    row.image = fields[0];
    if (row.image.empty()) fail(ErrorCode::SchemaMismatch, where + ": empty image path");
    if (!seen.insert(row.image).second) fail(ErrorCode::SchemaMismatch, where + ": duplicate image " + row.image);
    for (int i = 0; i < kTestCount; ++i) {
      const std::string& v = fields[static_cast<std::size_t>(i) + 1];
      if (v == "0")
        row.labels[i] = 0;
      else if (v == "1")
        row.labels[i] = 1;
      else if (v != "NA")
        fail(ErrorCode::SchemaMismatch, where + ": label must be 0, 1 or NA");
    }
    table.push_back(std::move(row));
  }
  return table;
}

LabelTable load_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IOFailure, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_labels(ss.str());
}

std::string format_labels(const LabelTable& table) {
  std::string out = header_line() + "\n";
  for (const LabelRow& row : table) {
    out += row.image;
    for (const auto& l : row.labels) out += l ? (*l ? ",1" : ",0") : ",NA";
    out += '\n';
  }
  return out;
}

void save_labels(const LabelTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IOFailure, "cannot write " + path.string());
  out << format_labels(table);
  if (!out) fail(ErrorCode::IOFailure, "cannot write " + path.string());
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ScoredImage score_image(const std::filesystem::path& path, const CorpusOptions& opts) {
  const ImageBuffer img = load_image(path);
  const std::optional<Annotation> ann = find_annotation(path);
  ScoredImage out;
  out.image = path.string();
  try {
    const FaceContext ctx = preprocess(img, opts.preprocess, ann ? &*ann : nullptr);
    out.scores = score_all(ctx, TestRegistry::standard(), opts.env);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoFaceDetected) throw;
    out.face_found = false;
    out.scores.assign(kTestCount, RawScore::not_computable(e.what()));
  }
  return out;
}

ScoredCorpus score_corpus(const std::filesystem::path& dir, const LabelTable& labels, const CorpusOptions& opts) {
  if (labels.empty()) fail(ErrorCode::EmptyCorpus, "label table has no images");
  LabelTable sorted = labels;
  std::sort(sorted.begin(), sorted.end(), [](const LabelRow& a, const LabelRow& b) { return a.image < b.image; });
  ScoredCorpus corpus;
  corpus.images.resize(sorted.size());
  parallel_for(sorted.size(), opts.jobs, [&](std::size_t i) {
    ScoredImage s = score_image(dir / sorted[i].image, opts);
    s.image = sorted[i].image;
    s.labels = sorted[i].labels;
    corpus.images[i] = std::move(s);
  });
  return corpus;
}

}  // namespace faceqvec
