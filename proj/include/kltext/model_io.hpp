#ifndef KLTEXT_MODEL_IO_HPP
#define KLTEXT_MODEL_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kltext/bayes.hpp"
#include "kltext/centroid.hpp"
#include "kltext/corpus.hpp"
#include "kltext/ga_reduce.hpp"
#include "kltext/kl_decomp.hpp"
#include "kltext/pc_classifier.hpp"

namespace kltext {

struct TrainConfig {
  Eigen::Index components = kDefaultComponents;  // per class, capped at class size
  IterationConfig kl;
  double smoothing = 1.0;

  void validate() const;

  friend bool operator==(const TrainConfig& a, const TrainConfig& b) {
    return a.components == b.components && a.kl.max_iterations == b.kl.max_iterations &&
           a.kl.tolerance == b.kl.tolerance && a.smoothing == b.smoothing;
  }
};

/// GA outcome for one class and the mask actually applied.
struct ClassReduction {
  std::string class_id;
  std::vector<TermId> term_map;  // coordinates the mask ranges over (centroid support)
  Chromosome mask;               // applied mask; all ones when the class is infeasible
  GaResult search;               // best chromosome the search reached, with diagnostics
  bool infeasible = false;
  double containment = 0.0;      // of the applied mask on the reduction corpus
  ClassModel reduced_model;      // principal-component model over the kept coordinates

  std::vector<TermId> kept_terms() const;

  friend bool operator==(const ClassReduction&, const ClassReduction&) = default;
};

struct Reduction {
  GaConfig config;
  std::vector<ClassReduction> classes;

  const ClassReduction* find(std::string_view class_id) const;

  friend bool operator==(const Reduction&, const Reduction&) = default;
};

/// Everything `train` and `reduce` produce. Classes appear in the same order
/// in centroids, bayes and class_models.
struct ModelFile {
  static constexpr int kFormatVersion = 1;

  TrainConfig config;
  Vocabulary vocabulary;
  std::vector<Centroid> centroids;
  BayesModel bayes;
  std::vector<ClassModel> class_models;
  std::optional<Reduction> reduction;

  std::vector<std::string> class_ids() const;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

/// Deterministic JSON text (sorted keys, full double precision).
std::string serialize_model(const ModelFile& model);
/// Checks the format version and every class-id and TermId reference.
/// Throws FormatError.
ModelFile parse_model(std::string_view json);

void save_model(const std::filesystem::path& file, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& file);

/// Vocabulary, classes and per-document [term-id, weight] pairs as JSON text.
std::string serialize_dataset(const LabeledDataset& dataset);

/// Writes to a sibling temporary file and renames it over `file`.
void write_atomic(const std::filesystem::path& file, std::string_view content);

std::string read_text_file(const std::filesystem::path& file);

}  // namespace kltext

#endif  // KLTEXT_MODEL_IO_HPP
