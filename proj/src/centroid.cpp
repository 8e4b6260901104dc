#include "kltext/centroid.hpp"

#include <map>

#include "kltext/error.hpp"

namespace kltext {

double dot(const SparseVector& v, const SparseVector& w) {
  auto a = v.entries().begin();
  auto b = w.entries().begin();
  const auto a_end = v.entries().end();
  const auto b_end = w.entries().end();
  double sum = 0.0;
  while (a != a_end && b != b_end) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      sum += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return sum;
}

namespace {

SparseVector normalized_sum(const std::map<TermId, double>& sum) {
  std::vector<SparseVector::Entry> entries(sum.begin(), sum.end());
  std::erase_if(entries, [](const auto& e) { return e.second == 0.0; });
  return normalize_counts(SparseVector(std::move(entries)));
}

}  // namespace

Centroid class_centroid(std::string class_id, std::span<const SparseVector> docs) {
  if (docs.empty()) throw Error(ErrorCode::EmptyClass, "class '" + class_id + "' has no documents");
  std::map<TermId, double> sum;
  for (const auto& d : docs) {
    for (const auto& [id, w] : d.entries()) sum[id] += w;
  }
  return Centroid{std::move(class_id), normalized_sum(sum)};
}

Centroid superclass_central_vector(std::span<const Centroid> centroids, std::string id) {
  if (centroids.empty()) throw Error(ErrorCode::EmptyClass, "no centroids to combine");
  std::map<TermId, double> sum;
  for (const auto& c : centroids) {
    for (const auto& [term, w] : c.vector.entries()) sum[term] += w;
  }
  return Centroid{std::move(id), normalized_sum(sum)};
}

const std::string& cosine_classify(const SparseVector& unit, std::span<const Centroid> centroids) {
  if (centroids.empty()) throw Error(ErrorCode::InvalidArgument, "no centroids");
  const Centroid* best = nullptr;
  double best_score = 0.0;
  for (const auto& c : centroids) {
    const double s = dot(unit, c.vector);
    const bool better = best == nullptr || s > best_score + kTieTolerance ||
                        (s >= best_score - kTieTolerance && c.class_id < best->class_id);
    if (better) {
      best = &c;
      best_score = s;
    }
  }
  return best->class_id;
}

std::vector<bool> separation_holds(const LabeledDataset& dataset, std::span<const Centroid> centroids) {
  std::vector<bool> holds(dataset.documents.size(), false);
  for (std::size_t i = 0; i < dataset.documents.size(); ++i) {
    const auto& doc = dataset.documents[i];
    const double own = dot(doc.unit, find_centroid(centroids, doc.label.value()).vector);
    bool ok = true;
    for (const auto& c : centroids) {
      if (c.class_id == *doc.label) continue;
      if (!(own > dot(doc.unit, c.vector) + kTieTolerance)) {
        ok = false;
        break;
      }
    }
    holds[i] = ok;
  }
  return holds;
}

std::vector<Centroid> build_centroids(const LabeledDataset& dataset) {
  std::vector<Centroid> out;
  out.reserve(dataset.classes.size());
  for (const auto& info : dataset.classes) {
    const auto docs = dataset.unit_vectors(info);
    out.push_back(class_centroid(info.id, docs));
  }
  return out;
}

const Centroid& find_centroid(std::span<const Centroid> centroids, const std::string& class_id) {
  for (const auto& c : centroids) {
    if (c.class_id == class_id) return c;
  }
  throw Error(ErrorCode::InvalidArgument, "no centroid for class '" + class_id + "'");
}

}  // namespace kltext
