#include "kltext/bayes.hpp"

#include <algorithm>
#include <limits>

namespace kltext {

namespace {

// Relative gap in log-joint below which two classes are tied.
constexpr double kTie = 1e-12;

}  // namespace

BayesModel fit_bayes(const LabeledDataset& dataset, double smoothing) {
  if (!(smoothing > 0.0)) throw Error(ErrorCode::InvalidArgument, "smoothing must be > 0");
  if (dataset.documents.empty()) throw Error(ErrorCode::EmptyClass, "dataset has no documents");

  BayesModel model;
  model.smoothing = smoothing;
  model.vocabulary_size = dataset.vocabulary.size();
  const auto total_docs = static_cast<double>(dataset.documents.size());
  for (const auto& info : dataset.classes) {
    BayesClassStats stats;
    stats.class_id = info.id;
    stats.doc_count = static_cast<std::int64_t>(info.members.size());
    stats.prior = static_cast<double>(stats.doc_count) / total_docs;
    for (auto i : info.members) {
      for (const auto& [id, n] : dataset.documents[i].counts.entries()) {
        const auto count = static_cast<std::int64_t>(n);
        stats.counters[id] += count;
        stats.term_total += count;
      }
    }
    model.classes.push_back(std::move(stats));
  }
  return model;
}

std::vector<double> log_joint(const BayesModel& model, const SparseVector& counts) {
  const double vocab = static_cast<double>(model.vocabulary_size);
  std::vector<double> out;
  out.reserve(model.classes.size());
  for (const auto& c : model.classes) {
    const double log_denominator = std::log(static_cast<double>(c.term_total) + model.smoothing * vocab);
    double lp = std::log(c.prior);
    for (const auto& [id, n] : counts.entries()) {
      const auto it = c.counters.find(id);
      const double hits = it == c.counters.end() ? 0.0 : static_cast<double>(it->second);
      lp += n * (std::log(hits + model.smoothing) - log_denominator);
    }
    out.push_back(lp);
  }
  return out;
}

std::vector<double> normalize_log_joint(std::span<const double> log_joint) {
  if (log_joint.empty()) return {};
  const double peak = *std::max_element(log_joint.begin(), log_joint.end());
  std::vector<double> out;
  out.reserve(log_joint.size());
  double z = 0.0;
  for (double v : log_joint) {
    out.push_back(std::exp(v - peak));
    z += out.back();
  }
  for (double& p : out) p /= z;
  return out;
}

std::map<std::string, double> posterior(const BayesModel& model, const Document& doc) {
  const auto probs = normalize_log_joint(log_joint(model, doc.counts));
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < probs.size(); ++i) out[model.classes[i].class_id] = probs[i];
  return out;
}

std::string bayes_classify(const BayesModel& model, const Document& doc) {
  if (model.classes.empty()) throw Error(ErrorCode::InvalidArgument, "model has no classes");
  const auto lj = log_joint(model, doc.counts);
  std::size_t best = 0;
  for (std::size_t i = 1; i < lj.size(); ++i) {
    const double gap = lj[i] - lj[best];
    const double scale = std::max(1.0, std::abs(lj[best]));
    if (gap > kTie * scale || (gap >= -kTie * scale && model.classes[i].class_id < model.classes[best].class_id)) {
      best = i;
    }
  }
  return model.classes[best].class_id;
}

}  // namespace kltext
