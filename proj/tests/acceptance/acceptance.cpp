// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../ga_oracle.hpp"
#include "../kl_oracle.hpp"
#include "../test_util.hpp"
#include "kltext/commands.hpp"

using namespace kltext;
namespace oracle = kltext::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

const IterationConfig kAcceptanceKl{10000, 1e-12};

// Twenty seeded data matrices with well-separated Gram spectra.
struct Instance {
  Eigen::MatrixXd data;
  PrincipalBasis<double> basis;
  oracle::GramSpectrum spectrum;
};

std::vector<Instance> kl_instances() {
  std::vector<Instance> out;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    const auto n = std::uniform_int_distribution<Eigen::Index>(3, 10)(rng);
    const auto d = std::uniform_int_distribution<Eigen::Index>(std::max<Eigen::Index>(4, n), 16)(rng);
    Instance inst;
    inst.data = oracle::separated_data(rng, n, d);
    inst.spectrum = oracle::gram_spectrum(inst.data);
    out.push_back(std::move(inst));
  }
  return out;
}

Outcome criterion_kl_oracle(std::vector<Instance>& instances) {
  const auto start = Clock::now();
  double worst_eigen = 0.0, worst_tail = 0.0;
  for (auto& inst : instances) {
    const auto n = inst.data.rows();
    inst.basis = decompose(inst.data, n, kAcceptanceKl);
    if (inst.basis.size() != n) return {false, "decomposition truncated"};
    for (Eigen::Index i = 0; i < n; ++i) {
      worst_eigen = std::max(worst_eigen, relative(inst.basis.norms_squared[i], inst.spectrum.values[i]));
    }
    for (Eigen::Index m = 1; m < n; ++m) {
      const double err = (inst.data - reconstruct_all(inst.basis, m)).squaredNorm();
      worst_tail = std::max(worst_tail, relative(err, oracle::optimal_tail(inst.spectrum, m)));
    }
  }
  const double elapsed = seconds_since(start);
  return {worst_eigen <= 1e-5 && worst_tail <= 1e-4 && elapsed < 5.0,
          "max eigenvalue rel err " + fmt("%.2e", worst_eigen) + " (<= 1e-5), max tail rel err " +
              fmt("%.2e", worst_tail) + " (<= 1e-4), " + fmt("%.3f", elapsed) + " s (< 5 s)"};
}

Outcome criterion_kl_properties(const std::vector<Instance>& instances) {
  double parseval = 0.0, gram = 0.0, residual = 0.0;
  for (const auto& inst : instances) {
    const auto n = inst.data.rows();
    const double energy = inst.data.squaredNorm();
    parseval = std::max(parseval, relative(inst.basis.norms_squared.sum(), energy));
    const Eigen::MatrixXd g = inst.basis.coefficients * inst.basis.coefficients.transpose();
    gram = std::max(gram, (g - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
    residual = std::max(residual, (inst.data - reconstruct_all(inst.basis, n)).norm() / std::sqrt(energy));
  }
  return {parseval <= 1e-6 && gram <= 1e-6 && residual <= 1e-6,
          "Parseval rel err " + fmt("%.2e", parseval) + ", alpha Gram max dev " + fmt("%.2e", gram) +
              ", full-rank residual " + fmt("%.2e", residual) + " (all <= 1e-6)"};
}

Outcome criterion_ga_oracle() {
  const auto start = Clock::now();
  int matches = 0, largest = 0;
  for (int s = 0; s < 100; ++s) {
    Rng pick(1000 + static_cast<std::uint64_t>(s));
    SyntheticConfig cfg;
    cfg.classes = 2 + static_cast<int>(pick.uniform_index(2));
    cfg.docs_per_class = 6 + static_cast<int>(pick.uniform_index(5));
    cfg.signal_terms = 3 + static_cast<int>(pick.uniform_index(3));
    cfg.noise_terms = 2 + static_cast<int>(pick.uniform_index(5));
    cfg.min_length = 8;
    cfg.max_length = 20;
    cfg.seed = 5000 + static_cast<std::uint64_t>(s);
    oracle::TempDir dir;
    write_synthetic(dir.path(), cfg);
    const auto ds = load_corpus(dir.path());
    const auto centroids = build_centroids(ds);
    const auto problem = make_class_problem(ds, centroids, ds.classes[0].id);
    if (problem.length() > 12) return {false, "instance " + std::to_string(s) + " exceeds 12 genes"};
    largest = std::max(largest, static_cast<int>(problem.length()));

    GaConfig ga;
    ga.seed = static_cast<std::uint64_t>(s);
    GaResult result;
    try {
      result = run_ga(problem, ga);
    } catch (const InfeasibleClassError& e) {
      result = e.result();
    }
    const auto optimum = oracle::exhaustive_optimum(problem, ga.containment_threshold, ga.reduction_weight);
    if (std::abs(result.best_fitness - optimum.fitness) <= 1e-9) ++matches;
  }
  const double elapsed = seconds_since(start);
  return {matches >= 95 && elapsed < 60.0,
          std::to_string(matches) + "/100 instances at the exhaustive optimum within 1e-9 (>= 95), L <= " +
              std::to_string(largest) + ", " + fmt("%.2f", elapsed) + " s (< 60 s)"};
}

struct DeskCorpus {
  oracle::TempDir dir;
  fs::path corpus = dir / "corpus";
  fs::path model = dir / "model.json";
  fs::path reduced = dir / "reduced.json";
  fs::path csv = dir / "reduction.csv";
};

SyntheticConfig desk_config() {
  SyntheticConfig cfg;
  cfg.classes = 4;
  cfg.docs_per_class = 25;
  cfg.signal_terms = 20;
  cfg.noise_terms = 40;
  cfg.seed = 42;
  return cfg;
}

Outcome criterion_desk_reduction(DeskCorpus& desk) {
  const auto start = Clock::now();
  std::ostringstream out, err;
  if (cmd_gen_synthetic({desk.corpus, desk_config()}, out, err) != kExitOk) return {false, err.str()};
  if (cmd_train({desk.corpus, desk.model, {}, std::nullopt}, out, err) != kExitOk) return {false, err.str()};
  GaConfig ga;
  ga.containment_threshold = 0.9;
  if (cmd_reduce({desk.model, desk.corpus, desk.reduced, desk.csv, ga}, out, err) != kExitOk) return {false, err.str()};
  const double elapsed = seconds_since(start);

  std::istringstream csv(oracle::read_file(desk.csv));
  std::string line;
  std::getline(csv, line);
  bool all_ok = true;
  double best_reduction = 0.0;
  std::string rows;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::istringstream cs(line);
    for (std::string cell; std::getline(cs, cell, ',');) cells.push_back(cell);
    const double reduction = std::stod(cells[3]);
    const double containment = std::stod(cells[4]);
    all_ok = all_ok && containment >= 0.9 && reduction >= 10.0;
    best_reduction = std::max(best_reduction, reduction);
    rows += (rows.empty() ? "" : "; ") + cells[0] + " reduction " + fmt("%.1f", reduction) + "% containment " +
            fmt("%.2f", containment);
  }
  return {all_ok && best_reduction >= 30.0 && elapsed < 120.0,
          rows + "; " + fmt("%.2f", elapsed) + " s (< 120 s)"};
}

Outcome criterion_classifier_sanity(const DeskCorpus& desk) {
  const auto model = load_model(desk.model);
  std::string detail;
  bool ok = true;
  for (auto method : {Method::Cosine, Method::Bayes, Method::Pc}) {
    const auto report = evaluate(model, desk.corpus, {0.0, 42, method});
    ok = ok && report.overall_accuracy >= 95.0;
    detail += to_string(method) + " " + fmt("%.1f", report.overall_accuracy) + "%, ";
  }
  const auto dataset = load_corpus(desk.corpus, model.vocabulary);
  double self = 0.0, scale = 0.0;
  for (const auto& cm : model.class_models) {
    const Eigen::VectorXd center = cm.basis.components.transpose() * cm.lambda;
    self = std::max(self, pc_mahalanobis(center, cm));
    for (auto i : dataset.class_info(cm.class_id).members) {
      const Eigen::VectorXd z = gather(dataset.documents[i].unit, cm.term_map);
      const double d = pc_mahalanobis(z, cm);
      for (double c : {0.5, 3.0}) scale = std::max(scale, std::abs(pc_mahalanobis(c * z, cm) - d));
    }
  }
  ok = ok && self <= 1e-9 && scale <= 1e-9;
  return {ok, detail + "max self-distance " + fmt("%.2e", self) + ", max scale deviation " + fmt("%.2e", scale) +
                  " (<= 1e-9)"};
}

Outcome criterion_bayes(const DeskCorpus& desk) {
  const auto model = load_model(desk.model);
  const auto dataset = load_corpus(desk.corpus, model.vocabulary);
  double worst_sum = 0.0;
  for (const auto& doc : dataset.documents) {
    double total = 0.0;
    for (const auto& [_, p] : posterior(model.bayes, doc)) total += p;
    worst_sum = std::max(worst_sum, std::abs(total - 1.0));
  }
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_distance = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const auto dim = std::uniform_int_distribution<Eigen::Index>(1, 8)(rng);
    Eigen::VectorXd x(dim), mu(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      x[i] = u(rng);
      mu[i] = u(rng);
    }
    const CovarianceModel<double> cov{mu, Eigen::MatrixXd::Identity(dim, dim)};
    worst_distance = std::max(worst_distance, std::abs(mahalanobis_full(x, cov) - (x - mu).norm()));
  }
  return {worst_sum <= 1e-9 && worst_distance <= 1e-12,
          "max |sum posterior - 1| " + fmt("%.2e", worst_sum) + " over " + std::to_string(dataset.documents.size()) +
              " documents (<= 1e-9), max |identity Mahalanobis - Euclidean| " + fmt("%.2e", worst_distance) +
              " (<= 1e-12)"};
}

Outcome criterion_determinism(const DeskCorpus& desk) {
  std::ostringstream out, err;
  std::vector<std::string> models, csvs, reports;
  for (int run = 0; run < 2; ++run) {
    const auto tag = std::to_string(run);
    const fs::path model = desk.dir / ("det_model" + tag + ".json");
    const fs::path reduced = desk.dir / ("det_reduced" + tag + ".json");
    const fs::path csv = desk.dir / ("det" + tag + ".csv");
    const fs::path report = desk.dir / ("det_report" + tag + ".json");
    if (cmd_train({desk.corpus, model, {}, std::nullopt}, out, err) != kExitOk) return {false, err.str()};
    GaConfig ga;
    ga.seed = 7;
    if (cmd_reduce({model, desk.corpus, reduced, csv, ga}, out, err) != kExitOk) return {false, err.str()};
    if (cmd_evaluate({reduced, desk.corpus, report, {0.2, 9, Method::Pc}, false}, out, err) != kExitOk) {
      return {false, err.str()};
    }
    models.push_back(oracle::read_file(model) + oracle::read_file(reduced));
    csvs.push_back(oracle::read_file(csv));
    reports.push_back(oracle::read_file(report));
  }
  const bool same_model = models[0] == models[1];
  const bool same_csv = csvs[0] == csvs[1];
  const bool same_report = reports[0] == reports[1];
  auto word = [](bool b) { return b ? "identical" : "DIFFERENT"; };
  return {same_model && same_csv && same_report,
          std::string("model files ") + word(same_model) + ", CSV " + word(same_csv) + ", report " + word(same_report)};
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int number, const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << number << ": " << name << " -- " << o.detail
              << std::endl;
  };

  auto instances = kl_instances();
  report(1, "KL decomposition vs dense eigensolver", [&] { return criterion_kl_oracle(instances); });
  report(2, "KL property suite", [&] { return criterion_kl_properties(instances); });
  report(3, "GA vs exhaustive search", [] { return criterion_ga_oracle(); });
  DeskCorpus desk;
  report(4, "desk-scale class dimension reduction", [&] { return criterion_desk_reduction(desk); });
  report(5, "classifier sanity", [&] { return criterion_classifier_sanity(desk); });
  report(6, "Bayes correctness", [&] { return criterion_bayes(desk); });
  report(7, "determinism", [&] { return criterion_determinism(desk); });
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
