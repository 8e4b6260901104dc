#include "kltext/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace kltext {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Method method) {
  switch (method) {
    case Method::Pc: return "pc";
    case Method::Cosine: return "cosine";
    case Method::Bayes: return "bayes";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "pc") return Method::Pc;
  if (name == "cosine") return Method::Cosine;
  if (name == "bayes") return Method::Bayes;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "' (expected pc, cosine or bayes)");
}

int exit_code_for(const Error& error) { return error.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitData; }

namespace {

std::string fixed6(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

double round6(double value) { return std::round(value * 1e6) / 1e6; }

double percent(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

void require_same_classes(const std::vector<std::string>& model_ids, const LabeledDataset& dataset) {
  if (dataset.class_ids() != model_ids) {
    throw Error(ErrorCode::FormatError, "corpus classes do not match the model classes");
  }
}

// Keeps the entries whose term has a new id, renumbered; `mapping` is
// indexed by old id and holds -1 for dropped terms. The mapping is
// monotone, so entry order is preserved.
SparseVector remap(const SparseVector& v, const std::vector<std::int64_t>& mapping) {
  std::vector<SparseVector::Entry> entries;
  for (const auto& [id, w] : v.entries()) {
    if (id < mapping.size() && mapping[id] >= 0) entries.emplace_back(static_cast<TermId>(mapping[id]), w);
  }
  return SparseVector(std::move(entries));
}

Document remapped_document(const Document& doc, const std::vector<std::int64_t>& mapping) {
  Document out{doc.id, doc.label, remap(doc.counts, mapping), {}};
  if (!out.counts.empty()) out.unit = normalize_counts(out.counts);
  return out;
}

// Dataset over the chosen documents with a vocabulary compacted to the terms
// they use (kept in the original id order). Returns the old -> new mapping.
std::pair<LabeledDataset, std::vector<std::int64_t>> subset_dataset(
    const LabeledDataset& full, const std::vector<std::vector<std::size_t>>& chosen) {
  std::vector<bool> used(full.vocabulary.size(), false);
  for (const auto& members : chosen) {
    for (auto i : members) {
      for (const auto& e : full.documents[i].counts.entries()) used[e.first] = true;
    }
  }
  std::vector<std::int64_t> mapping(full.vocabulary.size(), -1);
  std::vector<std::string> words;
  for (std::size_t id = 0; id < used.size(); ++id) {
    if (!used[id]) continue;
    mapping[id] = static_cast<std::int64_t>(words.size());
    words.push_back(full.vocabulary.wordform(static_cast<TermId>(id)));
  }
  LabeledDataset out;
  out.vocabulary = Vocabulary(std::move(words));
  for (std::size_t c = 0; c < full.classes.size(); ++c) {
    ClassInfo info{full.classes[c].id, {}};
    for (auto i : chosen[c]) {
      info.members.push_back(out.documents.size());
      out.documents.push_back(remapped_document(full.documents[i], mapping));
    }
    out.classes.push_back(std::move(info));
  }
  return {std::move(out), std::move(mapping)};
}

ClassModel reduced_class_model(const ClassProblem& problem, const Chromosome& mask, const TrainConfig& config) {
  std::vector<SparseVector> docs;
  for (Eigen::Index k = 0; k < problem.doc_count(); ++k) {
    std::vector<SparseVector::Entry> entries;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      const double w = problem.docs(k, static_cast<Eigen::Index>(i));
      if (mask.genes[i] && w != 0.0) entries.emplace_back(problem.term_map[i], w);
    }
    if (!entries.empty()) docs.push_back(normalize_counts(SparseVector(std::move(entries))));
  }
  if (docs.empty()) throw Error(ErrorCode::ZeroData, "mask removes every document of class '" + problem.class_id + "'");
  return build_class_model(problem.class_id, docs, config.components, config.kl);
}

std::vector<fs::path> collect_inputs(const fs::path& input, std::vector<std::string>& ids) {
  std::vector<std::pair<std::string, fs::path>> found;
  if (fs::is_directory(input)) {
    std::error_code ec;
    for (auto it = fs::recursive_directory_iterator(input, ec); it != fs::recursive_directory_iterator(); it.increment(ec)) {
      if (ec) break;
      if (!it->is_regular_file() || it->path().extension() != ".txt") continue;
      fs::path rel = fs::relative(it->path(), input);
      rel.replace_extension();
      found.emplace_back(rel.generic_string(), it->path());
    }
    if (ec) throw Error(ErrorCode::IoError, "cannot list " + input.string() + ": " + ec.message());
  } else if (fs::is_regular_file(input)) {
    found.emplace_back(input.stem().string(), input);
  } else {
    throw Error(ErrorCode::IoError, "no such file or directory: " + input.string());
  }
  std::sort(found.begin(), found.end());
  std::vector<fs::path> files;
  for (auto& [id, path] : found) {
    ids.push_back(id);
    files.push_back(path);
  }
  return files;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace

ModelFile train_model(const LabeledDataset& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.classes.empty()) throw Error(ErrorCode::EmptyClass, "corpus has no classes");
  ModelFile model;
  model.config = config;
  model.vocabulary = dataset.vocabulary;
  model.vocabulary.freeze();
  model.centroids = build_centroids(dataset);
  model.bayes = fit_bayes(dataset, config.smoothing);
  for (const auto& c : dataset.classes) {
    model.class_models.push_back(build_class_model(c.id, dataset.unit_vectors(c), config.components, config.kl));
  }
  return model;
}

std::vector<std::string> reduce_model(ModelFile& model, const LabeledDataset& dataset, const GaConfig& config) {
  config.validate();
  require_same_classes(model.class_ids(), dataset);
  std::vector<std::string> warnings;
  Reduction reduction{config, {}};
  for (const auto& id : model.class_ids()) {
    const auto problem = make_class_problem(dataset, model.centroids, id);
    ClassReduction r;
    r.class_id = id;
    r.term_map = problem.term_map;
    try {
      r.search = run_ga(problem, config);
      r.mask = r.search.best;
      r.containment = r.search.containment;
    } catch (const InfeasibleClassError& e) {
      r.search = e.result();
      r.infeasible = true;
      r.mask = Chromosome::ones(problem.term_map.size());
      r.containment = evaluate_parts(r.mask, problem).containment;
      warnings.push_back("class '" + id + "' is inseparable at theta " + fixed6(config.containment_threshold) +
                         " (containment " + fixed6(r.containment) + ", best reached " +
                         fixed6(e.best_containment()) + "); kept all coordinates");
    }
    r.reduced_model = reduced_class_model(problem, r.mask, model.config);
    reduction.classes.push_back(std::move(r));
  }
  model.reduction = std::move(reduction);
  return warnings;
}

std::string reduction_csv(const Reduction& reduction) {
  std::ostringstream out;
  out << "class,dim,zeros,reduction_pct,containment,generations\n";
  for (const auto& r : reduction.classes) {
    const auto zeros = r.mask.count_zeros();
    out << r.class_id << ',' << r.mask.size() << ',' << zeros << ',' << fixed6(percent(zeros, r.mask.size())) << ','
        << fixed6(r.containment) << ',' << r.search.generations_run << '\n';
  }
  return out.str();
}

Prediction predict(const ModelFile& model, const Document& doc, Method method) {
  Prediction p;
  if (doc.unit.empty()) {
    p.diagnostic = "EMPTY";
    return p;
  }
  switch (method) {
    case Method::Cosine:
      for (const auto& c : model.centroids) p.scores.emplace_back(c.class_id, dot(doc.unit, c.vector));
      p.winner = cosine_classify(doc.unit, model.centroids);
      break;
    case Method::Bayes: {
      const auto post = posterior(model.bayes, doc);
      for (const auto& c : model.bayes.classes) p.scores.emplace_back(c.class_id, post.at(c.class_id));
      p.winner = bayes_classify(model.bayes, doc);
      break;
    }
    case Method::Pc: {
      std::vector<ClassModel> reduced;
      if (model.reduction) {
        for (const auto& r : model.reduction->classes) reduced.push_back(r.reduced_model);
      }
      const auto& models = model.reduction ? reduced : model.class_models;
      try {
        const auto report = classify(doc.unit, models);
        for (const auto& m : models) p.scores.emplace_back(m.class_id, report.distances.at(m.class_id));
        p.winner = report.winner;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AllNull) throw;
        for (const auto& m : models) p.scores.emplace_back(m.class_id, std::numeric_limits<double>::infinity());
        p.diagnostic = "ALL_NULL";
      }
      break;
    }
  }
  return p;
}

EvalReport evaluate(const ModelFile& model, const fs::path& corpus_root, const EvaluateOptions& options) {
  const double f = options.split_fraction;
  if (!(f >= 0.0 && f < 1.0)) throw Error(ErrorCode::InvalidArgument, "split fraction must lie in [0, 1)");

  ModelFile trained;
  LabeledDataset eval_set;
  const ModelFile* scored = &model;
  if (f == 0.0) {
    eval_set = load_corpus(corpus_root, model.vocabulary);
    const auto ids = model.class_ids();
    for (const auto& c : eval_set.classes) {
      if (std::find(ids.begin(), ids.end(), c.id) == ids.end()) {
        throw Error(ErrorCode::FormatError, "corpus class '" + c.id + "' is not in the model");
      }
    }
  } else {
    const auto full = load_corpus(corpus_root);
    Rng rng(options.seed);
    std::vector<std::vector<std::size_t>> train(full.classes.size()), test(full.classes.size());
    for (std::size_t c = 0; c < full.classes.size(); ++c) {
      auto members = full.classes[c].members;
      const std::size_t n = members.size();
      if (n < 2) {
        throw Error(ErrorCode::TooFewDocs, "class '" + full.classes[c].id + "' needs at least 2 documents to split");
      }
      for (std::size_t i = n - 1; i > 0; --i) std::swap(members[i], members[rng.uniform_index(i + 1)]);
      const auto held = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(f * static_cast<double>(n))), 1, n - 1);
      test[c].assign(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(held));
      train[c].assign(members.begin() + static_cast<std::ptrdiff_t>(held), members.end());
      std::sort(test[c].begin(), test[c].end());
      std::sort(train[c].begin(), train[c].end());
    }
    auto [train_set, mapping] = subset_dataset(full, train);
    trained = train_model(train_set, model.config);
    if (model.reduction) reduce_model(trained, train_set, model.reduction->config);
    scored = &trained;

    eval_set.vocabulary = trained.vocabulary;
    for (std::size_t c = 0; c < full.classes.size(); ++c) {
      ClassInfo info{full.classes[c].id, {}};
      for (auto i : test[c]) {
        info.members.push_back(eval_set.documents.size());
        eval_set.documents.push_back(remapped_document(full.documents[i], mapping));
      }
      eval_set.classes.push_back(std::move(info));
    }
  }

  EvalReport report;
  report.method = options.method;
  report.split_fraction = f;
  report.seed = options.seed;
  report.masked = scored->reduction.has_value();

  const auto holds = scored->reduction ? std::vector<bool>{} : separation_holds(eval_set, scored->centroids);
  for (const auto& c : eval_set.classes) {
    ClassEvaluation ce;
    ce.class_id = c.id;
    ce.documents = c.members.size();
    for (auto i : c.members) {
      const auto& doc = eval_set.documents[i];
      const auto p = predict(*scored, doc, options.method);
      const std::string predicted = p.winner.value_or("-");
      ++report.confusion[c.id][predicted];
      if (!p.winner) ++report.unclassified;
      if (predicted == c.id) ++ce.correct;
    }
    ce.accuracy = percent(ce.correct, ce.documents);

    ce.dim_before = find_centroid(scored->centroids, c.id).support();
    ce.dim_after = ce.dim_before;
    std::size_t satisfied = 0;
    if (const auto* r = scored->reduction ? scored->reduction->find(c.id) : nullptr) {
      const auto problem = make_class_problem(eval_set, scored->centroids, c.id, r->term_map);
      satisfied = is_allowed(r->mask, problem).satisfied;
      ce.dim_after = r->mask.count_ones();
    } else {
      for (auto i : c.members) satisfied += holds[i];
    }
    ce.containment = percent(satisfied, ce.documents);
    ce.reduction_pct = ce.dim_before == 0 ? 0.0 : 100.0 * (1.0 - static_cast<double>(ce.dim_after) / static_cast<double>(ce.dim_before));

    report.documents += ce.documents;
    report.correct += ce.correct;
    report.classes.push_back(std::move(ce));
  }
  report.overall_accuracy = percent(report.correct, report.documents);
  return report;
}

std::string report_json(const EvalReport& report) {
  json j;
  j["format_version"] = 1;
  j["config"] = {{"method", to_string(report.method)},
                 {"split_fraction", round6(report.split_fraction)},
                 {"seed", report.seed},
                 {"masked", report.masked}};
  j["classes"] = json::array();
  for (const auto& c : report.classes) {
    j["classes"].push_back({{"class", c.class_id},
                            {"documents", c.documents},
                            {"correct", c.correct},
                            {"accuracy", round6(c.accuracy)},
                            {"containment", round6(c.containment)},
                            {"dim_before", c.dim_before},
                            {"dim_after", c.dim_after},
                            {"reduction_pct", round6(c.reduction_pct)}});
  }
  j["overall"] = {{"documents", report.documents},
                  {"correct", report.correct},
                  {"unclassified", report.unclassified},
                  {"accuracy", round6(report.overall_accuracy)}};
  j["confusion"] = report.confusion;
  if (report.seconds) j["timings"] = {{"seconds", round6(*report.seconds)}};
  return j.dump(1) + "\n";
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "class" << std::right << std::setw(7) << "docs" << std::setw(12) << "accuracy"
      << std::setw(13) << "containment" << std::setw(8) << "dim" << std::setw(8) << "kept" << std::setw(12)
      << "reduction" << '\n';
  for (const auto& c : report.classes) {
    out << std::left << std::setw(16) << c.class_id << std::right << std::setw(7) << c.documents << std::setw(12)
        << fixed6(c.accuracy) << std::setw(13) << fixed6(c.containment) << std::setw(8) << c.dim_before
        << std::setw(8) << c.dim_after << std::setw(12) << fixed6(c.reduction_pct) << '\n';
  }
  out << "overall accuracy " << fixed6(report.overall_accuracy) << "% (" << report.correct << '/' << report.documents
      << ", unclassified " << report.unclassified << ", method " << to_string(report.method) << ")\n";
  return out.str();
}

int cmd_train(const TrainCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto dataset = load_corpus(cmd.corpus);
    for (const auto& s : dataset.skipped) err << "warning: skipped empty document " << s << "\n";
    const auto model = train_model(dataset, cmd.config);
    save_model(cmd.out_model, model);
    if (cmd.export_dataset) write_atomic(*cmd.export_dataset, serialize_dataset(dataset));
    for (std::size_t c = 0; c < model.class_models.size(); ++c) {
      const auto& m = model.class_models[c];
      out << m.class_id << ": docs=" << dataset.classes[c].members.size()
          << " wordforms=" << model.centroids[c].support() << " components=" << m.basis.size() << " iterations=";
      for (std::size_t i = 0; i < m.basis.iterations.size(); ++i) out << (i ? "," : "") << m.basis.iterations[i];
      if (m.basis.rank_deficient) out << " rank-deficient";
      out << "\n";
    }
    return kExitOk;
  });
}

int cmd_classify(const ClassifyCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto model = load_model(cmd.model);
    std::vector<std::string> ids;
    const auto files = collect_inputs(cmd.input, ids);
    if (files.empty()) throw Error(ErrorCode::IoError, "no .txt documents under " + cmd.input.string());
    std::size_t failures = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
      const auto doc = read_document(files[i], ids[i], model.vocabulary);
      const auto p = predict(model, doc, cmd.method);
      if (!p.winner) ++failures;
      out << ids[i] << '\t' << p.winner.value_or("-") << '\t';
      for (std::size_t s = 0; s < p.scores.size(); ++s) {
        out << (s ? " " : "") << p.scores[s].first << '=' << fixed6(p.scores[s].second);
      }
      out << '\t' << (p.diagnostic.empty() ? "OK" : p.diagnostic) << '\n';
    }
    return failures == files.size() ? kExitData : kExitOk;
  });
}

int cmd_reduce(const ReduceCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto model = load_model(cmd.model);
    const auto dataset = load_corpus(cmd.corpus, model.vocabulary);
    for (const auto& w : reduce_model(model, dataset, cmd.ga)) err << "warning: " << w << "\n";
    save_model(cmd.out_model, model);
    const auto csv = reduction_csv(*model.reduction);
    write_atomic(cmd.csv, csv);
    out << csv;
    return kExitOk;
  });
}

int cmd_evaluate(const EvaluateCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto start = std::chrono::steady_clock::now();
    const auto model = load_model(cmd.model);
    auto report = evaluate(model, cmd.corpus, cmd.options);
    if (cmd.timings) report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << report_table(report);
    if (cmd.report) write_atomic(*cmd.report, report_json(report));
    return kExitOk;
  });
}

int cmd_gen_synthetic(const GenerateCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    write_synthetic(cmd.out_dir, cmd.config);
    out << "wrote " << cmd.config.classes * cmd.config.docs_per_class << " documents in " << cmd.config.classes
        << " classes to " << cmd.out_dir.string() << "\n";
    return kExitOk;
  });
}

}  // namespace kltext
