#include "kltext/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "kltext/error.hpp"

namespace kltext {

namespace fs = std::filesystem;

SparseVector::SparseVector(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].second == 0.0 || !std::isfinite(entries_[i].second)) {
      throw Error(ErrorCode::InvalidArgument, "sparse vector weight must be finite and nonzero");
    }
    if (i > 0 && entries_[i - 1].first >= entries_[i].first) {
      throw Error(ErrorCode::InvalidArgument, "sparse vector term ids must be strictly increasing");
    }
  }
}

SparseVector SparseVector::from_unsorted(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  std::vector<Entry> merged;
  merged.reserve(entries.size());
  for (const auto& e : entries) {
    if (!merged.empty() && merged.back().first == e.first) {
      merged.back().second += e.second;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const Entry& e) { return e.second == 0.0; });
  return SparseVector(std::move(merged));
}

double SparseVector::weight(TermId term) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), term,
                             [](const Entry& e, TermId t) { return e.first < t; });
  return (it != entries_.end() && it->first == term) ? it->second : 0.0;
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (const auto& [_, w] : entries_) s += w * w;
  return s;
}

double SparseVector::norm() const { return std::sqrt(squared_norm()); }

Vocabulary::Vocabulary(std::vector<std::string> wordforms) {
  for (auto& w : wordforms) intern(w);
}

std::optional<TermId> Vocabulary::find(std::string_view wordform) const {
  auto it = index_.find(std::string(wordform));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TermId Vocabulary::intern(const std::string& wordform) {
  if (auto it = index_.find(wordform); it != index_.end()) return it->second;
  if (frozen_) throw Error(ErrorCode::InvalidArgument, "vocabulary is frozen");
  const auto id = static_cast<TermId>(words_.size());
  words_.push_back(wordform);
  index_.emplace(wordform, id);
  return id;
}

const std::string& Vocabulary::wordform(TermId id) const {
  if (id >= words_.size()) throw Error(ErrorCode::IndexOutOfRange, "term id " + std::to_string(id));
  return words_[id];
}

const ClassInfo& LabeledDataset::class_info(std::string_view id) const {
  for (const auto& c : classes) {
    if (c.id == id) return c;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown class '" + std::string(id) + "'");
}

std::vector<std::string> LabeledDataset::class_ids() const {
  std::vector<std::string> ids;
  ids.reserve(classes.size());
  for (const auto& c : classes) ids.push_back(c.id);
  return ids;
}

std::vector<SparseVector> LabeledDataset::unit_vectors(const ClassInfo& info) const {
  std::vector<SparseVector> out;
  out.reserve(info.members.size());
  for (auto i : info.members) out.push_back(documents.at(i).unit);
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c >= 0 && u_isalnum(c)) {
      const UChar32 lower = u_tolower(c);
      char buf[U8_MAX_LENGTH];
      int32_t n = 0;
      U8_APPEND_UNSAFE(buf, n, lower);
      current.append(buf, static_cast<std::size_t>(n));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

SparseVector counts_from_map(const std::map<TermId, std::int64_t>& tally) {
  std::vector<SparseVector::Entry> entries;
  entries.reserve(tally.size());
  for (const auto& [id, n] : tally) entries.emplace_back(id, static_cast<double>(n));
  return SparseVector(std::move(entries));
}

}  // namespace

SparseVector count_wordforms(std::span<const std::string> tokens, Vocabulary& vocab) {
  if (vocab.frozen()) return count_wordforms(tokens, std::as_const(vocab));
  std::map<TermId, std::int64_t> tally;
  for (const auto& t : tokens) ++tally[vocab.intern(t)];
  return counts_from_map(tally);
}

SparseVector count_wordforms(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::map<TermId, std::int64_t> tally;
  for (const auto& t : tokens) {
    if (auto id = vocab.find(t)) ++tally[*id];
  }
  return counts_from_map(tally);
}

SparseVector normalize_counts(const SparseVector& counts) {
  if (counts.empty()) throw Error(ErrorCode::EmptyDocument, "cannot normalize an empty vector");
  const double norm = counts.norm();
  std::vector<SparseVector::Entry> entries(counts.entries().begin(), counts.entries().end());
  for (auto& e : entries) e.second /= norm;
  return SparseVector(std::move(entries));
}

Document make_document(std::string id, std::optional<std::string> label, SparseVector counts) {
  Document doc{std::move(id), std::move(label), std::move(counts), {}};
  doc.unit = normalize_counts(doc.counts);
  return doc;
}

namespace {

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  return ss.str();
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (directories ? entry.is_directory() : entry.is_regular_file()) out.push_back(entry.path());
  }
  if (ec) throw Error(ErrorCode::IoError, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

// A frozen vocabulary makes count_wordforms drop unknown wordforms.
void load_into(const fs::path& root, LabeledDataset& dataset) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::IoError, "not a directory: " + root.string());
  for (const auto& class_dir : sorted_entries(root, true)) {
    ClassInfo info{class_dir.filename().string(), {}};
    for (const auto& file : sorted_entries(class_dir, false)) {
      if (file.extension() != ".txt") continue;
      const auto tokens = tokenize(read_file(file));
      auto counts = count_wordforms(tokens, dataset.vocabulary);
      if (counts.empty()) {
        dataset.skipped.push_back(info.id + "/" + file.filename().string());
        continue;
      }
      info.members.push_back(dataset.documents.size());
      dataset.documents.push_back(
          make_document(info.id + "/" + file.stem().string(), info.id, std::move(counts)));
    }
    if (info.members.empty()) {
      throw Error(ErrorCode::EmptyClass, "class directory has no non-empty documents: " + class_dir.string());
    }
    dataset.classes.push_back(std::move(info));
  }
}

}  // namespace

LabeledDataset load_corpus(const fs::path& root) {
  LabeledDataset dataset;
  load_into(root, dataset);
  return dataset;
}

LabeledDataset load_corpus(const fs::path& root, const Vocabulary& frozen) {
  LabeledDataset dataset;
  dataset.vocabulary = frozen;
  dataset.vocabulary.freeze();
  load_into(root, dataset);
  return dataset;
}

Document read_document(const fs::path& file, std::string id, const Vocabulary& vocab) {
  const auto tokens = tokenize(read_file(file));
  Document doc{std::move(id), std::nullopt, count_wordforms(tokens, vocab), {}};
  if (!doc.counts.empty()) doc.unit = normalize_counts(doc.counts);
  return doc;
}

Eigen::VectorXd to_dense(const SparseVector& v, std::size_t dim) {
  if (v.extent() > dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "term id " + std::to_string(v.extent() - 1) + " outside dimension " + std::to_string(dim));
  }
  Eigen::VectorXd dense = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (const auto& [id, w] : v.entries()) dense[id] = w;
  return dense;
}

Eigen::VectorXd gather(const SparseVector& v, std::span<const TermId> term_map) {
  Eigen::VectorXd dense = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(term_map.size()));
  auto entry = v.entries().begin();
  const auto end = v.entries().end();
  for (std::size_t i = 0; i < term_map.size() && entry != end; ++i) {
    while (entry != end && entry->first < term_map[i]) ++entry;
    if (entry != end && entry->first == term_map[i]) dense[static_cast<Eigen::Index>(i)] = entry->second;
  }
  return dense;
}

}  // namespace kltext
