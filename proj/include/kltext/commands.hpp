#ifndef KLTEXT_COMMANDS_HPP
#define KLTEXT_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kltext/model_io.hpp"
#include "kltext/synthetic.hpp"

namespace kltext {

enum class Method { Pc, Cosine, Bayes };

std::string to_string(Method method);
/// "pc", "cosine" or "bayes"; throws InvalidArgument otherwise.
Method parse_method(const std::string& name);

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Exit code for an error: invalid arguments are usage errors, everything
/// else is a data error.
int exit_code_for(const Error& error);

// In-memory pipeline.

/// Centroids, Bayes statistics and one principal-component model per class.
ModelFile train_model(const LabeledDataset& dataset, const TrainConfig& config);

/// Runs the GA for every class of `model` against `dataset` (which must use
/// the model's vocabulary) and attaches the result. Infeasible classes keep
/// the all-ones mask; one warning per such class is returned.
std::vector<std::string> reduce_model(ModelFile& model, const LabeledDataset& dataset, const GaConfig& config);

/// CSV with header class,dim,zeros,reduction_pct,containment,generations.
std::string reduction_csv(const Reduction& reduction);

struct Prediction {
  std::optional<std::string> winner;
  std::vector<std::pair<std::string, double>> scores;  // model class order
  std::string diagnostic;                              // empty, "EMPTY" or "ALL_NULL"
};

/// `doc` must be expressed over the model vocabulary. Scores are distances
/// for pc (lower wins, +inf for a null projection), similarities for cosine
/// and posteriors for bayes. The pc method uses the reduced class models when
/// the model carries a reduction.
Prediction predict(const ModelFile& model, const Document& doc, Method method);

struct ClassEvaluation {
  std::string class_id;
  std::size_t documents = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;     // percent
  double containment = 0.0;  // percent of documents satisfying the separation test
  std::size_t dim_before = 0;
  std::size_t dim_after = 0;
  double reduction_pct = 0.0;
};

struct EvalReport {
  Method method = Method::Pc;
  double split_fraction = 0.0;
  std::uint64_t seed = 0;
  bool masked = false;
  std::vector<ClassEvaluation> classes;
  std::size_t documents = 0;
  std::size_t correct = 0;
  std::size_t unclassified = 0;
  double overall_accuracy = 0.0;  // percent
  std::map<std::string, std::map<std::string, std::size_t>> confusion;  // actual -> predicted ("-" if none)
  std::optional<double> seconds;
};

struct EvaluateOptions {
  double split_fraction = 0.0;
  std::uint64_t seed = 42;
  Method method = Method::Pc;
};

/// Split 0 scores `model` on `corpus_root` read through the model vocabulary.
/// A positive split holds out that fraction of every class (seeded shuffle),
/// retrains with the model's configuration (and reduction settings, when
/// present) on the rest, and scores the held-out documents.
EvalReport evaluate(const ModelFile& model, const std::filesystem::path& corpus_root, const EvaluateOptions& options);

/// Deterministic JSON; 6-decimal values. Timings only when present.
std::string report_json(const EvalReport& report);
std::string report_table(const EvalReport& report);

// Commands. Each returns a process exit code and never throws.

struct TrainCommand {
  std::filesystem::path corpus;
  std::filesystem::path out_model;
  TrainConfig config;
  std::optional<std::filesystem::path> export_dataset;
};

struct ClassifyCommand {
  std::filesystem::path model;
  std::filesystem::path input;  // a file, or a directory searched recursively for *.txt
  Method method = Method::Pc;
};

struct ReduceCommand {
  std::filesystem::path model;
  std::filesystem::path corpus;
  std::filesystem::path out_model;
  std::filesystem::path csv;
  GaConfig ga;
};

struct EvaluateCommand {
  std::filesystem::path model;
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> report;
  EvaluateOptions options;
  bool timings = false;
};

struct GenerateCommand {
  std::filesystem::path out_dir;
  SyntheticConfig config;
};

int cmd_train(const TrainCommand& cmd, std::ostream& out, std::ostream& err);
int cmd_classify(const ClassifyCommand& cmd, std::ostream& out, std::ostream& err);
int cmd_reduce(const ReduceCommand& cmd, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateCommand& cmd, std::ostream& out, std::ostream& err);
int cmd_gen_synthetic(const GenerateCommand& cmd, std::ostream& out, std::ostream& err);

}  // namespace kltext

#endif  // KLTEXT_COMMANDS_HPP
