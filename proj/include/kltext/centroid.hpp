#ifndef KLTEXT_CENTROID_HPP
#define KLTEXT_CENTROID_HPP

#include <span>
#include <string>
#include <vector>

#include "kltext/corpus.hpp"

namespace kltext {

/// Two similarity scores closer than this are treated as tied.
inline constexpr double kTieTolerance = 1e-12;

/// Unit-normalized sum of a class's unit document vectors.
struct Centroid {
  std::string class_id;
  SparseVector vector;

  /// Number of unique wordforms in the class.
  std::size_t support() const { return vector.size(); }

  friend bool operator==(const Centroid&, const Centroid&) = default;
};

double dot(const SparseVector& v, const SparseVector& w);

/// Coordinate-wise sum of `docs` renormalized to unit length. Throws
/// EmptyClass when `docs` is empty.
Centroid class_centroid(std::string class_id, std::span<const SparseVector> docs);

/// Central vector of a set of classes: union of wordforms, coordinates summed
/// across centroids, renormalized.
Centroid superclass_central_vector(std::span<const Centroid> centroids, std::string id = "*");

/// Class whose centroid has the largest dot product with `unit`; ties go to
/// the lexicographically smallest class id.
const std::string& cosine_classify(const SparseVector& unit, std::span<const Centroid> centroids);

/// For every document of `dataset` (same order as `dataset.documents`):
/// true iff its own-class similarity strictly exceeds every other class's.
std::vector<bool> separation_holds(const LabeledDataset& dataset, std::span<const Centroid> centroids);

/// One centroid per dataset class, in dataset class order.
std::vector<Centroid> build_centroids(const LabeledDataset& dataset);

const Centroid& find_centroid(std::span<const Centroid> centroids, const std::string& class_id);

}  // namespace kltext

#endif  // KLTEXT_CENTROID_HPP
