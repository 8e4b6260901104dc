#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "kltext/commands.hpp"
#include "test_util.hpp"

using namespace kltext;
using kltext::testing::expect_code;
using kltext::testing::read_file;
using kltext::testing::TempDir;
using kltext::testing::write_file;

namespace fs = std::filesystem;

namespace {

SyntheticConfig small_corpus(int classes = 3) {
  SyntheticConfig cfg;
  cfg.classes = classes;
  cfg.docs_per_class = 12;
  cfg.signal_terms = 8;
  cfg.noise_terms = 10;
  cfg.min_length = 20;
  cfg.max_length = 40;
  cfg.seed = 11;
  return cfg;
}

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

template <typename Cmd, typename Fn>
Run run(Fn fn, const Cmd& cmd) {
  std::ostringstream out, err;
  const int code = fn(cmd, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream cs(line);
    std::string cell;
    while (std::getline(cs, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int run_cli(const std::string& args) {
  const std::string command = std::string(KLTEXT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Workspace : public ::testing::Test {
 protected:
  TempDir dir;
  fs::path corpus = dir / "corpus";
  fs::path model = dir / "model.json";

  void generate(const SyntheticConfig& cfg) { write_synthetic(corpus, cfg); }

  void train(const TrainConfig& config = {}) {
    TrainCommand cmd{corpus, model, config, std::nullopt};
    const auto r = run(cmd_train, cmd);
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
};

}  // namespace

TEST(GenSynthetic, TwoOrthogonalSingleDocumentClasses) {
  TempDir dir;
  SyntheticConfig cfg;
  cfg.classes = 2;
  cfg.docs_per_class = 1;
  cfg.noise_terms = 0;
  write_synthetic(dir.path(), cfg);
  const auto ds = load_corpus(dir.path());
  ASSERT_EQ(ds.classes.size(), 2u);
  ASSERT_EQ(ds.documents.size(), 2u);
  EXPECT_EQ(dot(ds.documents[0].unit, ds.documents[1].unit), 0.0);
}

TEST(GenSynthetic, DefaultParametersSeparateNearlyEveryDocument) {
  TempDir dir;
  write_synthetic(dir.path(), SyntheticConfig{});
  const auto ds = load_corpus(dir.path());
  const auto holds = separation_holds(ds, build_centroids(ds));
  const auto ok = static_cast<double>(std::count(holds.begin(), holds.end(), true));
  EXPECT_GE(ok, 0.95 * static_cast<double>(holds.size()));
}

TEST(GenSynthetic, SignalDominatesNoiseFourToOne) {
  SyntheticConfig cfg;
  cfg.docs_per_class = 200;
  std::size_t signal = 0, noise = 0;
  for (const auto& doc : generate_synthetic(cfg)) {
    for (const auto& token : tokenize(doc.text)) (token.starts_with("noise") ? noise : signal) += 1;
  }
  EXPECT_NEAR(static_cast<double>(signal) / static_cast<double>(noise), 4.0, 0.1);
}

TEST(GenSynthetic, SameSeedSameTree) {
  const auto a = generate_synthetic(small_corpus());
  const auto b = generate_synthetic(small_corpus());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].relative_path, b[i].relative_path);
    EXPECT_EQ(a[i].text, b[i].text);
  }
  auto other = small_corpus();
  other.seed = 12;
  EXPECT_NE(generate_synthetic(other)[0].text, a[0].text);
  auto bad = small_corpus();
  bad.classes = 0;
  expect_code(ErrorCode::InvalidArgument, [&] { generate_synthetic(bad); });
}

TEST_F(Workspace, TrainProducesOneEntryPerClassAndIsDeterministic) {
  generate(small_corpus());
  train();
  const auto first = read_file(model);
  const auto m = load_model(model);
  EXPECT_EQ(m.centroids.size(), 3u);
  EXPECT_EQ(m.class_models.size(), 3u);
  EXPECT_EQ(m.bayes.classes.size(), 3u);
  train();
  EXPECT_EQ(read_file(model), first);
}

TEST_F(Workspace, TrainReportsEmptyClassByName) {
  generate(small_corpus());
  write_file(corpus / "hollow" / "a.txt", "  ,,, \n");
  TrainCommand cmd{corpus, model, {}, std::nullopt};
  const auto r = run(cmd_train, cmd);
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("hollow"), std::string::npos) << r.err;
}

TEST_F(Workspace, ModelRoundTrip) {
  generate(small_corpus());
  train();
  const auto base = load_model(model);
  EXPECT_EQ(parse_model(serialize_model(base)), base);

  auto reduced = base;
  const auto ds = load_corpus(corpus, base.vocabulary);
  reduce_model(reduced, ds, GaConfig{});
  const auto again = parse_model(serialize_model(reduced));
  EXPECT_EQ(again, reduced);
  EXPECT_EQ(serialize_model(again), serialize_model(reduced));
}

TEST_F(Workspace, ModelLoadRejectsBadFiles) {
  generate(small_corpus(2));
  train();
  auto text = read_file(model);
  expect_code(ErrorCode::FormatError, [] { parse_model("{not json"); });

  auto versioned = text;
  versioned.replace(versioned.find("\"format_version\": 1"), 19, "\"format_version\": 9");
  expect_code(ErrorCode::FormatError, [&] { parse_model(versioned); });

  auto m = load_model(model);
  m.centroids[0].vector = SparseVector({{static_cast<TermId>(m.vocabulary.size() + 5), 1.0}});
  expect_code(ErrorCode::FormatError, [&] { parse_model(serialize_model(m)); });

  m = load_model(model);
  std::swap(m.class_models[0], m.class_models[1]);
  expect_code(ErrorCode::FormatError, [&] { parse_model(serialize_model(m)); });
  expect_code(ErrorCode::IoError, [&] { load_model(dir / "missing.json"); });
}

TEST_F(Workspace, DatasetExportListsEveryDocument) {
  generate(small_corpus(2));
  const fs::path exported = dir / "dataset.json";
  TrainCommand cmd{corpus, model, {}, exported};
  ASSERT_EQ(run(cmd_train, cmd).code, kExitOk);
  const auto text = read_file(exported);
  EXPECT_NE(text.find("\"vocabulary\""), std::string::npos);
  EXPECT_NE(text.find("class01/doc011"), std::string::npos);
}

TEST_F(Workspace, ClassifyMethodsAndDiagnostics) {
  generate(small_corpus());
  train();
  const auto m = load_model(model);

  ClassifyCommand cmd{model, corpus, Method::Cosine};
  auto r = run(cmd_classify, cmd);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::size_t count = 0;
  std::string previous;
  while (std::getline(lines, line)) {
    const auto id = line.substr(0, line.find('\t'));
    const auto winner = line.substr(id.size() + 1, line.find('\t', id.size() + 1) - id.size() - 1);
    EXPECT_EQ(winner, id.substr(0, id.find('/'))) << line;
    EXPECT_LT(previous, id);
    EXPECT_NE(line.find("=0."), std::string::npos);
    previous = id;
    ++count;
  }
  EXPECT_EQ(count, 36u);

  // pc and bayes agree on the separable corpus.
  const auto ds = load_corpus(corpus, m.vocabulary);
  for (const auto& doc : ds.documents) {
    const auto pc = predict(m, doc, Method::Pc);
    const auto bayes = predict(m, doc, Method::Bayes);
    EXPECT_EQ(pc.winner, bayes.winner) << doc.id;
    EXPECT_EQ(pc.winner, doc.label) << doc.id;
  }

  write_file(dir / "inputs" / "blank.txt", "");
  write_file(dir / "inputs" / "unknown.txt", "zzz qqq");
  write_file(dir / "inputs" / "real.txt", "c00sig001 c00sig002 c00sig003");
  r = run(cmd_classify, ClassifyCommand{model, dir / "inputs", Method::Pc});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("blank\t-\t\tEMPTY"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("unknown\t-\t\tEMPTY"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("real\tclass00\t"), std::string::npos) << r.out;

  r = run(cmd_classify, ClassifyCommand{model, dir / "inputs" / "blank.txt", Method::Bayes});
  EXPECT_EQ(r.code, kExitData);
}

TEST(Predict, AllNullDiagnostic) {
  const auto ds = kltext::testing::make_dataset({{"A", "apple banana cherry"}, {"B", "cat dog mouse"}});
  auto m = train_model(ds, {});
  GaConfig ga;
  ga.containment_threshold = 0.0;  // keeps a single coordinate per class
  reduce_model(m, ds, ga);
  std::vector<SparseVector::Entry> dropped;
  for (const auto& r : m.reduction->classes) {
    for (std::size_t i = 0; i < r.term_map.size(); ++i) {
      if (!r.mask.genes[i]) dropped.emplace_back(r.term_map[i], 1.0);
    }
  }
  Document doc{"q", std::nullopt, SparseVector::from_unsorted(dropped), {}};
  doc.unit = normalize_counts(doc.counts);
  const auto p = predict(m, doc, Method::Pc);
  EXPECT_FALSE(p.winner);
  EXPECT_EQ(p.diagnostic, "ALL_NULL");
  ASSERT_EQ(p.scores.size(), 2u);
  EXPECT_TRUE(std::isinf(p.scores[0].second));
  EXPECT_TRUE(predict(m, doc, Method::Cosine).winner);
}

TEST_F(Workspace, ReduceMeetsThresholdAndIsDeterministic) {
  generate(small_corpus());
  train();
  ReduceCommand cmd{model, corpus, dir / "reduced.json", dir / "red.csv", GaConfig{}};
  auto r = run(cmd_reduce, cmd);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto csv = read_file(dir / "red.csv");
  const auto rows = parse_csv(csv);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "class,dim,zeros,reduction_pct,containment,generations");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 6u);
    const double dim = std::stod(rows[i][1]), zeros = std::stod(rows[i][2]);
    EXPECT_NEAR(std::stod(rows[i][3]), 100.0 * zeros / dim, 5e-7);
    EXPECT_GE(std::stod(rows[i][3]), 10.0);
    EXPECT_GE(std::stod(rows[i][4]), 0.9);
  }
  const auto reduced = read_file(dir / "reduced.json");
  ASSERT_EQ(run(cmd_reduce, cmd).code, kExitOk);
  EXPECT_EQ(read_file(dir / "red.csv"), csv);
  EXPECT_EQ(read_file(dir / "reduced.json"), reduced);

  const auto m = load_model(dir / "reduced.json");
  ASSERT_TRUE(m.reduction);
  for (const auto& c : m.reduction->classes) {
    EXPECT_FALSE(c.infeasible);
    EXPECT_EQ(c.reduced_model.term_map, c.kept_terms());
  }
}

TEST_F(Workspace, ReduceWarnsOnInseparableClass) {
  write_file(corpus / "a" / "1.txt", "apple apple banana");
  write_file(corpus / "a" / "2.txt", "banana apple");
  write_file(corpus / "a" / "3.txt", "dog cat cat dog cat");
  write_file(corpus / "b" / "1.txt", "dog cat");
  write_file(corpus / "b" / "2.txt", "cat cat mouse");
  train();
  GaConfig ga;
  ga.containment_threshold = 1.0;
  const auto r = run(cmd_reduce, ReduceCommand{model, corpus, dir / "reduced.json", dir / "red.csv", ga});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.err.find("warning: class 'a' is inseparable"), std::string::npos) << r.err;
  const auto rows = parse_csv(read_file(dir / "red.csv"));
  EXPECT_EQ(rows[1][0], "a");
  EXPECT_EQ(rows[1][2], "0");
  EXPECT_LT(std::stod(rows[1][4]), 1.0);
  const auto m = load_model(dir / "reduced.json");
  EXPECT_TRUE(m.reduction->classes[0].infeasible);
}

TEST_F(Workspace, EvaluateTrainingSetAndSplits) {
  generate(small_corpus());
  train();
  EvaluateCommand cmd{model, corpus, dir / "report.json", {}, false};
  auto r = run(cmd_evaluate, cmd);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto m = load_model(model);
  const auto report = evaluate(m, corpus, {});
  EXPECT_EQ(report.overall_accuracy, 100.0);
  EXPECT_EQ(report.unclassified, 0u);
  for (const auto& c : report.classes) {
    EXPECT_EQ(c.dim_before, c.dim_after);
    EXPECT_EQ(c.reduction_pct, 0.0);
    EXPECT_EQ(c.containment, 100.0);
  }
  const auto json = read_file(dir / "report.json");
  EXPECT_EQ(json.find("timings"), std::string::npos);
  ASSERT_EQ(run(cmd_evaluate, cmd).code, kExitOk);
  EXPECT_EQ(read_file(dir / "report.json"), json);

  cmd.options.split_fraction = 0.25;
  cmd.options.seed = 3;
  ASSERT_EQ(run(cmd_evaluate, cmd).code, kExitOk);
  const auto split_json = read_file(dir / "report.json");
  ASSERT_EQ(run(cmd_evaluate, cmd).code, kExitOk);
  EXPECT_EQ(read_file(dir / "report.json"), split_json);
  const auto split = evaluate(m, corpus, cmd.options);
  EXPECT_EQ(split.documents, 9u);  // 3 of 12 per class

  cmd.timings = true;
  ASSERT_EQ(run(cmd_evaluate, cmd).code, kExitOk);
  EXPECT_NE(read_file(dir / "report.json").find("timings"), std::string::npos);
}

TEST_F(Workspace, EvaluateReportsReductionColumns) {
  generate(small_corpus());
  train();
  ASSERT_EQ(run(cmd_reduce, ReduceCommand{model, corpus, dir / "reduced.json", dir / "red.csv", GaConfig{}}).code,
            kExitOk);
  const auto m = load_model(dir / "reduced.json");
  const auto report = evaluate(m, corpus, {});
  EXPECT_TRUE(report.masked);
  for (const auto& c : report.classes) {
    const auto* r = m.reduction->find(c.class_id);
    EXPECT_EQ(c.dim_before, r->mask.size());
    EXPECT_EQ(c.dim_after, r->mask.count_ones());
    EXPECT_NEAR(c.reduction_pct, 100.0 * static_cast<double>(r->mask.count_zeros()) / static_cast<double>(r->mask.size()), 1e-9);
    EXPECT_NEAR(c.containment, 100.0 * r->containment, 1e-9);
  }
}

TEST_F(Workspace, EvaluateSplitNeedsTwoDocumentsPerClass) {
  write_file(corpus / "a" / "1.txt", "apple banana");
  write_file(corpus / "a" / "2.txt", "banana cherry");
  write_file(corpus / "b" / "1.txt", "dog cat");
  train();
  EvaluateCommand cmd{model, corpus, std::nullopt, {0.5, 1, Method::Cosine}, false};
  const auto r = run(cmd_evaluate, cmd);
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("TooFewDocs"), std::string::npos) << r.err;
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli(""), kExitUsage);
  EXPECT_EQ(run_cli("frobnicate"), kExitUsage);
  EXPECT_EQ(run_cli("train"), kExitUsage);
  EXPECT_EQ(run_cli("classify m.json x --method nearest"), kExitUsage);
  EXPECT_EQ(run_cli("train " + (dir / "nope").string() + " -o " + (dir / "m.json").string()), kExitData);

  const auto corpus = (dir / "c").string();
  const auto model = (dir / "m.json").string();
  EXPECT_EQ(run_cli("gen-synthetic " + corpus + " --classes 2 --docs-per-class 4 --seed 3"), kExitOk);
  EXPECT_EQ(run_cli("train " + corpus + " -o " + model), kExitOk);
  EXPECT_EQ(run_cli("evaluate " + model + " " + corpus + " --method bayes"), kExitOk);
  EXPECT_EQ(run_cli("evaluate " + model + " " + corpus + " --split 2"), kExitUsage);
  EXPECT_EQ(run_cli("reduce " + model + " " + corpus + " -o " + (dir / "r.json").string() + " --csv " +
                    (dir / "r.csv").string() + " --population 3"),
            kExitUsage);
}
