#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "kltext/commands.hpp"

using namespace kltext;

namespace {

void add_kl_flags(CLI::App* app, TrainConfig& cfg) {
  app->add_option("-m,--components", cfg.components, "principal components per class (capped at class size)")
      ->capture_default_str();
  app->add_option("--kl-tolerance", cfg.kl.tolerance, "power-iteration stop threshold on max |delta alpha|")
      ->capture_default_str();
  app->add_option("--kl-max-iter", cfg.kl.max_iterations, "power-iteration cap per component")->capture_default_str();
  app->add_option("--smoothing", cfg.smoothing, "additive smoothing of the Bayes term model")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text classification with class centroids, principal-component Mahalanobis distance, "
               "naive Bayes, and genetic reduction of class dimension"};
  app.require_subcommand(1);

  TrainCommand train;
  auto* train_cmd = app.add_subcommand("train", "build centroids, Bayes statistics and class models from a corpus");
  train_cmd->add_option("corpus", train.corpus, "corpus root (<root>/<class>/<doc>.txt)")->required();
  train_cmd->add_option("-o,--out", train.out_model, "model file to write")->required();
  add_kl_flags(train_cmd, train.config);
  train_cmd->add_option("--export-dataset", train.export_dataset, "also write the vectorized corpus as JSON");

  ClassifyCommand classify;
  std::string classify_method = "pc";
  auto* classify_cmd = app.add_subcommand("classify", "classify a document or every .txt under a directory");
  classify_cmd->add_option("model", classify.model, "model file")->required();
  classify_cmd->add_option("input", classify.input, "document file or directory")->required();
  classify_cmd->add_option("--method", classify_method, "pc, cosine or bayes")
      ->check(CLI::IsMember({"pc", "cosine", "bayes"}))
      ->capture_default_str();

  ReduceCommand reduce;
  auto* reduce_cmd = app.add_subcommand("reduce", "search per-class coordinate masks with the genetic algorithm");
  reduce_cmd->add_option("model", reduce.model, "trained model file")->required();
  reduce_cmd->add_option("corpus", reduce.corpus, "corpus the fitness is evaluated on")->required();
  reduce_cmd->add_option("-o,--out", reduce.out_model, "model file to write, with masks")->required();
  reduce_cmd->add_option("--csv", reduce.csv, "per-class reduction CSV to write")->required();
  reduce_cmd->add_option("--theta", reduce.ga.containment_threshold, "required containment fraction")
      ->capture_default_str();
  reduce_cmd->add_option("--rho", reduce.ga.reduction_weight, "weight of reduction against retained energy")
      ->capture_default_str();
  reduce_cmd->add_option("--population", reduce.ga.population_size, "population size (even)")->capture_default_str();
  reduce_cmd->add_option("--mutation", reduce.ga.mutation_probability, "per-offspring mutation probability")
      ->capture_default_str();
  reduce_cmd->add_option("--generations", reduce.ga.max_generations, "generation cap")->capture_default_str();
  reduce_cmd->add_option("--stagnation", reduce.ga.stagnation_limit, "stop after this many generations without improvement")
      ->capture_default_str();
  reduce_cmd->add_option("--seed", reduce.ga.seed, "random seed")->capture_default_str();

  EvaluateCommand evaluate;
  std::string evaluate_method = "pc";
  auto* evaluate_cmd = app.add_subcommand("evaluate", "measure accuracy, containment and reduction on a corpus");
  evaluate_cmd->add_option("model", evaluate.model, "model file")->required();
  evaluate_cmd->add_option("corpus", evaluate.corpus, "corpus root")->required();
  evaluate_cmd->add_option("--report", evaluate.report, "JSON report to write");
  evaluate_cmd->add_option("--split", evaluate.options.split_fraction,
                           "held-out fraction per class; 0 scores the model on the whole corpus")
      ->capture_default_str();
  evaluate_cmd->add_option("--seed", evaluate.options.seed, "random seed for the split")->capture_default_str();
  evaluate_cmd->add_option("--method", evaluate_method, "pc, cosine or bayes")
      ->check(CLI::IsMember({"pc", "cosine", "bayes"}))
      ->capture_default_str();
  evaluate_cmd->add_flag("--timings", evaluate.timings, "include wall-clock time in the report");

  GenerateCommand generate;
  auto* generate_cmd = app.add_subcommand("gen-synthetic", "write a seeded synthetic corpus with planted noise");
  generate_cmd->add_option("out", generate.out_dir, "output corpus root")->required();
  generate_cmd->add_option("--classes", generate.config.classes)->capture_default_str();
  generate_cmd->add_option("--docs-per-class", generate.config.docs_per_class)->capture_default_str();
  generate_cmd->add_option("--signal-terms", generate.config.signal_terms, "own wordforms per class")
      ->capture_default_str();
  generate_cmd->add_option("--noise-terms", generate.config.noise_terms, "wordforms shared by all classes")
      ->capture_default_str();
  generate_cmd->add_option("--min-length", generate.config.min_length, "tokens per document, lower bound")
      ->capture_default_str();
  generate_cmd->add_option("--max-length", generate.config.max_length, "tokens per document, upper bound")
      ->capture_default_str();
  generate_cmd->add_option("--seed", generate.config.seed, "random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train, std::cout, std::cerr);
    if (*classify_cmd) {
      classify.method = parse_method(classify_method);
      return cmd_classify(classify, std::cout, std::cerr);
    }
    if (*reduce_cmd) return cmd_reduce(reduce, std::cout, std::cerr);
    if (*evaluate_cmd) {
      evaluate.options.method = parse_method(evaluate_method);
      return cmd_evaluate(evaluate, std::cout, std::cerr);
    }
    if (*generate_cmd) return cmd_gen_synthetic(generate, std::cout, std::cerr);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitUsage;
}
