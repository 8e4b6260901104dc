#ifndef KLTEXT_CORPUS_HPP
#define KLTEXT_CORPUS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace kltext {

/// Position of a wordform in the global vocabulary ordering.
using TermId = std::uint32_t;

/// Ordered (term, weight) pairs. Term ids are strictly increasing and no
/// zero weight is ever stored; the constructor enforces both.
class SparseVector {
 public:
  using Entry = std::pair<TermId, double>;

  SparseVector() = default;
  explicit SparseVector(std::vector<Entry> entries);

  /// Accepts entries in any order; duplicates are summed and zeros dropped.
  static SparseVector from_unsorted(std::vector<Entry> entries);

  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Weight for `term`, 0 when absent.
  double weight(TermId term) const;
  double squared_norm() const;
  double norm() const;

  /// Largest stored term id plus one (0 when empty).
  std::size_t extent() const { return entries_.empty() ? 0 : entries_.back().first + std::size_t{1}; }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Bidirectional wordform <-> TermId map, ids assigned in first-encounter
/// order. Once frozen, lookups of unknown wordforms fail softly.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> wordforms);

  std::optional<TermId> find(std::string_view wordform) const;
  /// Returns the id of `wordform`, adding it if absent. Throws on a frozen vocabulary.
  TermId intern(const std::string& wordform);
  const std::string& wordform(TermId id) const;

  std::size_t size() const { return words_.size(); }
  std::span<const std::string> wordforms() const { return words_; }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TermId> index_;
  bool frozen_ = false;
};

struct Document {
  std::string id;
  std::optional<std::string> label;
  SparseVector counts;  // positive integer weights
  SparseVector unit;    // counts / ||counts||_2

  friend bool operator==(const Document&, const Document&) = default;
};

struct ClassInfo {
  std::string id;
  std::vector<std::size_t> members;  // indices into LabeledDataset::documents

  friend bool operator==(const ClassInfo&, const ClassInfo&) = default;
};

struct LabeledDataset {
  Vocabulary vocabulary;
  std::vector<Document> documents;
  std::vector<ClassInfo> classes;
  /// `<class>/<file>` of documents with no wordforms; not part of `documents`.
  std::vector<std::string> skipped;

  const ClassInfo& class_info(std::string_view id) const;
  std::vector<std::string> class_ids() const;
  /// Unit vectors of the documents belonging to `info`.
  std::vector<SparseVector> unit_vectors(const ClassInfo& info) const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

/// Maximal runs of Unicode letters and digits, lowercased. Everything else
/// separates wordforms. Malformed UTF-8 bytes act as separators.
std::vector<std::string> tokenize(std::string_view text);

/// Counts occurrences per wordform. A frozen vocabulary drops unknown
/// wordforms; an open one grows.
SparseVector count_wordforms(std::span<const std::string> tokens, Vocabulary& vocab);
SparseVector count_wordforms(std::span<const std::string> tokens, const Vocabulary& vocab);

/// Divides every weight by the Euclidean norm. Throws EmptyDocument on an
/// empty vector.
SparseVector normalize_counts(const SparseVector& counts);

Document make_document(std::string id, std::optional<std::string> label, SparseVector counts);

/// Reads `<root>/<class-id>/<doc-id>.txt`. Classes and documents are
/// enumerated in lexicographic path order. Documents without any wordform
/// are recorded in `skipped`; a class left with no documents is an
/// EmptyClass error.
LabeledDataset load_corpus(const std::filesystem::path& root);
/// Same, against a frozen vocabulary (unknown wordforms are dropped).
LabeledDataset load_corpus(const std::filesystem::path& root, const Vocabulary& frozen);

/// Reads one text file into a document against a frozen vocabulary. The
/// unit vector is left empty when no known wordform occurs.
Document read_document(const std::filesystem::path& file, std::string id, const Vocabulary& vocab);

Eigen::VectorXd to_dense(const SparseVector& v, std::size_t dim);

/// Dense vector over the coordinates listed in `term_map` (strictly
/// increasing); terms of `v` outside the map are dropped.
Eigen::VectorXd gather(const SparseVector& v, std::span<const TermId> term_map);

}  // namespace kltext

#endif  // KLTEXT_CORPUS_HPP
