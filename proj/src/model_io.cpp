#include "kltext/model_io.hpp"

#include <fstream>
#include <sstream>
#include <unistd.h>

#include "json.hpp"

namespace kltext {

namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate() const {
  if (components < 1) throw Error(ErrorCode::InvalidArgument, "component count must be >= 1");
  kl.validate();
  if (!(smoothing > 0.0)) throw Error(ErrorCode::InvalidArgument, "smoothing must be > 0");
}

std::vector<TermId> ClassReduction::kept_terms() const {
  std::vector<TermId> kept;
  for (std::size_t i = 0; i < term_map.size() && i < mask.size(); ++i) {
    if (mask.genes[i]) kept.push_back(term_map[i]);
  }
  return kept;
}

const ClassReduction* Reduction::find(std::string_view class_id) const {
  for (const auto& c : classes) {
    if (c.class_id == class_id) return &c;
  }
  return nullptr;
}

std::vector<std::string> ModelFile::class_ids() const {
  std::vector<std::string> ids;
  for (const auto& c : centroids) ids.push_back(c.class_id);
  return ids;
}

namespace {

[[noreturn]] void format_error(const std::string& what) { throw Error(ErrorCode::FormatError, what); }

void require(bool condition, const std::string& what) {
  if (!condition) format_error(what);
}

// Serialization helpers.

json sparse_json(const SparseVector& v) {
  json out = json::array();
  for (const auto& [id, w] : v.entries()) out.push_back(json::array({id, w}));
  return out;
}

json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_json(m.row(r).transpose()));
  return rows;
}

json iteration_json(const IterationConfig& c) {
  return {{"max_iterations", c.max_iterations}, {"tolerance", c.tolerance}};
}

json ga_config_json(const GaConfig& c) {
  return {{"population_size", c.population_size},   {"mutation_probability", c.mutation_probability},
          {"max_generations", c.max_generations},   {"stagnation_limit", c.stagnation_limit},
          {"containment_threshold", c.containment_threshold}, {"reduction_weight", c.reduction_weight},
          {"seed", c.seed}};
}

json class_model_json(const ClassModel& m) {
  return {{"class", m.class_id},
          {"term_map", m.term_map},
          {"components", matrix_json(m.basis.components)},
          {"coefficients", matrix_json(m.basis.coefficients)},
          {"norms_squared", vector_json(m.basis.norms_squared)},
          {"iterations", m.basis.iterations},
          {"rank_deficient", m.basis.rank_deficient},
          {"lambda", vector_json(m.lambda)},
          {"central_unit", vector_json(m.central_unit)}};
}

json ga_result_json(const GaResult& r) {
  return {{"best", r.best.to_string()},           {"best_fitness", r.best_fitness},
          {"containment", r.containment},         {"reduction", r.reduction},
          {"generations_run", r.generations_run}, {"fitness_history", r.fitness_history}};
}

json bayes_json(const BayesModel& b) {
  json classes = json::array();
  for (const auto& c : b.classes) {
    json counters = json::array();
    for (const auto& [id, n] : c.counters) counters.push_back(json::array({id, n}));
    classes.push_back({{"class", c.class_id},
                       {"doc_count", c.doc_count},
                       {"prior", c.prior},
                       {"term_total", c.term_total},
                       {"counters", std::move(counters)}});
  }
  return {{"smoothing", b.smoothing}, {"vocabulary_size", b.vocabulary_size}, {"classes", std::move(classes)}};
}

// Parsing helpers. Every reader validates shape and references.

struct Reader {
  std::size_t vocabulary_size = 0;

  TermId term(const json& j) const {
    const auto id = j.get<std::uint64_t>();
    require(id < vocabulary_size, "term id " + std::to_string(id) + " outside vocabulary");
    return static_cast<TermId>(id);
  }

  std::vector<TermId> term_map(const json& j) const {
    std::vector<TermId> out;
    for (const auto& t : j) {
      out.push_back(term(t));
      require(out.size() < 2 || out[out.size() - 2] < out.back(), "term map must be strictly increasing");
    }
    return out;
  }

  SparseVector sparse(const json& j) const {
    std::vector<SparseVector::Entry> entries;
    for (const auto& e : j) {
      require(e.is_array() && e.size() == 2, "sparse entry must be [term, weight]");
      entries.emplace_back(term(e[0]), e[1].get<double>());
    }
    return SparseVector(std::move(entries));
  }
};

Eigen::VectorXd vector_from(const json& j, Eigen::Index expected, const std::string& what) {
  const auto values = j.get<std::vector<double>>();
  require(static_cast<Eigen::Index>(values.size()) == expected, what + " has the wrong length");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), expected);
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  require(j.is_array() && static_cast<Eigen::Index>(j.size()) == rows, what + " has the wrong row count");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) m.row(r) = vector_from(j[static_cast<std::size_t>(r)], cols, what).transpose();
  return m;
}

IterationConfig iteration_from(const json& j) {
  return {j.at("max_iterations").get<int>(), j.at("tolerance").get<double>()};
}

GaConfig ga_config_from(const json& j) {
  GaConfig c;
  c.population_size = j.at("population_size").get<int>();
  c.mutation_probability = j.at("mutation_probability").get<double>();
  c.max_generations = j.at("max_generations").get<int>();
  c.stagnation_limit = j.at("stagnation_limit").get<int>();
  c.containment_threshold = j.at("containment_threshold").get<double>();
  c.reduction_weight = j.at("reduction_weight").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

ClassModel class_model_from(const json& j, const Reader& reader) {
  ClassModel m;
  m.class_id = j.at("class").get<std::string>();
  m.term_map = reader.term_map(j.at("term_map"));
  const auto dim = m.dimension();
  const auto count = static_cast<Eigen::Index>(j.at("norms_squared").size());
  const auto sources = j.at("coefficients").empty() ? Eigen::Index{0}
                                                    : static_cast<Eigen::Index>(j.at("coefficients")[0].size());
  m.basis.components = matrix_from(j.at("components"), count, dim, "components");
  m.basis.coefficients = matrix_from(j.at("coefficients"), count, sources, "coefficients");
  m.basis.norms_squared = vector_from(j.at("norms_squared"), count, "norms_squared");
  m.basis.iterations = j.at("iterations").get<std::vector<int>>();
  require(static_cast<Eigen::Index>(m.basis.iterations.size()) == count, "iterations has the wrong length");
  m.basis.rank_deficient = j.at("rank_deficient").get<bool>();
  m.lambda = vector_from(j.at("lambda"), count, "lambda");
  m.central_unit = vector_from(j.at("central_unit"), dim, "central_unit");
  return m;
}

GaResult ga_result_from(const json& j) {
  GaResult r;
  r.best = Chromosome::from_string(j.at("best").get<std::string>());
  r.best_fitness = j.at("best_fitness").get<double>();
  r.containment = j.at("containment").get<double>();
  r.reduction = j.at("reduction").get<double>();
  r.generations_run = j.at("generations_run").get<int>();
  r.fitness_history = j.at("fitness_history").get<std::vector<double>>();
  return r;
}

BayesModel bayes_from(const json& j, const Reader& reader) {
  BayesModel b;
  b.smoothing = j.at("smoothing").get<double>();
  b.vocabulary_size = j.at("vocabulary_size").get<std::size_t>();
  for (const auto& c : j.at("classes")) {
    BayesClassStats s;
    s.class_id = c.at("class").get<std::string>();
    s.doc_count = c.at("doc_count").get<std::int64_t>();
    s.prior = c.at("prior").get<double>();
    s.term_total = c.at("term_total").get<std::int64_t>();
    for (const auto& e : c.at("counters")) {
      require(e.is_array() && e.size() == 2, "counter entry must be [term, count]");
      s.counters.emplace(reader.term(e[0]), e[1].get<std::int64_t>());
    }
    b.classes.push_back(std::move(s));
  }
  return b;
}

void check_class_order(const std::vector<std::string>& expected, const std::vector<std::string>& actual,
                       const std::string& section) {
  require(expected == actual, section + " classes do not match the centroid classes");
}

}  // namespace

std::string serialize_model(const ModelFile& model) {
  json j;
  j["format_version"] = ModelFile::kFormatVersion;
  j["config"] = {{"components", model.config.components},
                 {"kl", iteration_json(model.config.kl)},
                 {"smoothing", model.config.smoothing}};
  j["vocabulary"] = std::vector<std::string>(model.vocabulary.wordforms().begin(), model.vocabulary.wordforms().end());
  j["centroids"] = json::array();
  for (const auto& c : model.centroids) j["centroids"].push_back({{"class", c.class_id}, {"vector", sparse_json(c.vector)}});
  j["bayes"] = bayes_json(model.bayes);
  j["class_models"] = json::array();
  for (const auto& m : model.class_models) j["class_models"].push_back(class_model_json(m));
  if (model.reduction) {
    json classes = json::array();
    for (const auto& r : model.reduction->classes) {
      classes.push_back({{"class", r.class_id},
                         {"term_map", r.term_map},
                         {"mask", r.mask.to_string()},
                         {"search", ga_result_json(r.search)},
                         {"infeasible", r.infeasible},
                         {"containment", r.containment},
                         {"reduced_model", class_model_json(r.reduced_model)}});
    }
    j["reduction"] = {{"config", ga_config_json(model.reduction->config)}, {"classes", std::move(classes)}};
  }
  return j.dump(1) + "\n";
}

ModelFile parse_model(std::string_view text) {
  try {
    const json j = json::parse(text);
    require(j.at("format_version").get<int>() == ModelFile::kFormatVersion,
            "unsupported model format version " + j.at("format_version").dump());
    ModelFile model;
    const auto& cfg = j.at("config");
    model.config.components = cfg.at("components").get<Eigen::Index>();
    model.config.kl = iteration_from(cfg.at("kl"));
    model.config.smoothing = cfg.at("smoothing").get<double>();

    const auto words = j.at("vocabulary").get<std::vector<std::string>>();
    model.vocabulary = Vocabulary(words);
    require(model.vocabulary.size() == words.size(), "vocabulary contains duplicate wordforms");
    model.vocabulary.freeze();
    const Reader reader{model.vocabulary.size()};

    for (const auto& c : j.at("centroids")) {
      model.centroids.push_back({c.at("class").get<std::string>(), reader.sparse(c.at("vector"))});
    }
    const auto ids = model.class_ids();
    require(!ids.empty(), "model has no classes");

    model.bayes = bayes_from(j.at("bayes"), reader);
    std::vector<std::string> bayes_ids;
    for (const auto& c : model.bayes.classes) bayes_ids.push_back(c.class_id);
    check_class_order(ids, bayes_ids, "bayes");

    std::vector<std::string> model_ids;
    for (const auto& m : j.at("class_models")) {
      model.class_models.push_back(class_model_from(m, reader));
      model_ids.push_back(model.class_models.back().class_id);
    }
    check_class_order(ids, model_ids, "class_models");

    if (j.contains("reduction")) {
      Reduction red;
      red.config = ga_config_from(j.at("reduction").at("config"));
      std::vector<std::string> red_ids;
      for (const auto& r : j.at("reduction").at("classes")) {
        ClassReduction c;
        c.class_id = r.at("class").get<std::string>();
        c.term_map = reader.term_map(r.at("term_map"));
        c.mask = Chromosome::from_string(r.at("mask").get<std::string>());
        require(c.mask.size() == c.term_map.size(), "mask length does not match its term map");
        c.search = ga_result_from(r.at("search"));
        c.infeasible = r.at("infeasible").get<bool>();
        c.containment = r.at("containment").get<double>();
        c.reduced_model = class_model_from(r.at("reduced_model"), reader);
        require(c.reduced_model.class_id == c.class_id, "reduced model class does not match");
        red_ids.push_back(c.class_id);
        red.classes.push_back(std::move(c));
      }
      check_class_order(ids, red_ids, "reduction");
      model.reduction = std::move(red);
    }
    return model;
  } catch (const json::exception& e) {
    format_error(std::string("malformed model: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::FormatError) throw;
    format_error(std::string("malformed model: ") + e.what());
  }
}

void save_model(const fs::path& file, const ModelFile& model) { write_atomic(file, serialize_model(model)); }

ModelFile load_model(const fs::path& file) { return parse_model(read_text_file(file)); }

std::string serialize_dataset(const LabeledDataset& dataset) {
  json j;
  j["vocabulary"] = std::vector<std::string>(dataset.vocabulary.wordforms().begin(), dataset.vocabulary.wordforms().end());
  j["classes"] = json::array();
  for (const auto& c : dataset.classes) {
    std::vector<std::string> members;
    for (auto i : c.members) members.push_back(dataset.documents[i].id);
    j["classes"].push_back({{"class", c.id}, {"documents", members}});
  }
  j["documents"] = json::array();
  for (const auto& d : dataset.documents) {
    j["documents"].push_back({{"id", d.id},
                              {"label", d.label ? json(*d.label) : json(nullptr)},
                              {"counts", sparse_json(d.counts)},
                              {"unit", sparse_json(d.unit)}});
  }
  j["skipped"] = dataset.skipped;
  return j.dump(1) + "\n";
}

void write_atomic(const fs::path& file, std::string_view content) {
  fs::path tmp = file;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot replace " + file.string());
  }
}

std::string read_text_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace kltext
