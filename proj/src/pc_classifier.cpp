#include "kltext/pc_classifier.hpp"

#include <algorithm>

namespace kltext {

namespace {

std::vector<TermId> union_of_terms(std::span<const SparseVector> docs) {
  std::vector<TermId> terms;
  for (const auto& d : docs) {
    for (const auto& e : d.entries()) terms.push_back(e.first);
  }
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return terms;
}

void drop_light_components(PrincipalBasis<double>& basis) {
  if (basis.size() == 0) return;
  const double floor = kComponentFloor * basis.norms_squared[0];
  Eigen::Index keep = 0;
  while (keep < basis.size() && basis.norms_squared[keep] >= floor) ++keep;
  if (keep == basis.size()) return;
  basis.components.conservativeResize(keep, Eigen::NoChange);
  basis.coefficients.conservativeResize(keep, Eigen::NoChange);
  basis.norms_squared.conservativeResize(keep);
  basis.iterations.resize(static_cast<std::size_t>(keep));
  basis.rank_deficient = true;
}

}  // namespace

ClassModel build_class_model(std::string class_id, std::span<const SparseVector> docs, Eigen::Index m,
                             const IterationConfig& cfg) {
  if (docs.empty()) throw Error(ErrorCode::EmptyClass, "class '" + class_id + "' has no documents");
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "component count must be >= 1");

  ClassModel model;
  model.class_id = std::move(class_id);
  model.term_map = union_of_terms(docs);

  Eigen::MatrixXd data(static_cast<Eigen::Index>(docs.size()), model.dimension());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    data.row(static_cast<Eigen::Index>(i)) = gather(docs[i], model.term_map).transpose();
  }
  model.basis = decompose(data, std::min<Eigen::Index>(m, data.rows()), cfg);
  drop_light_components(model.basis);

  model.lambda = model.basis.coefficients.rowwise().sum();
  const Eigen::VectorXd center = model.basis.components.transpose() * model.lambda;
  const double norm = center.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::ZeroData, "class '" + model.class_id + "' has a zero central vector");
  model.central_unit = center / norm;
  return model;
}

double pc_mahalanobis(const Eigen::VectorXd& z, const ClassModel& model) {
  const Eigen::VectorXd beta = project(z, model.basis);
  const double projected = combination_norm(beta, model.basis.norms_squared);
  if (!(projected > 1e-12 * z.norm())) {
    throw Error(ErrorCode::NullProjection, "query lies outside the subspace of class '" + model.class_id + "'");
  }
  return pc_distance(beta, model.lambda, model.basis.norms_squared);
}

DistanceReport classify(const SparseVector& z, std::span<const ClassModel> models) {
  if (models.empty()) throw Error(ErrorCode::InvalidArgument, "no class models");
  DistanceReport report;
  const ClassModel* best = nullptr;
  double best_distance = std::numeric_limits<double>::infinity();
  for (const auto& model : models) {
    double distance = std::numeric_limits<double>::infinity();
    try {
      distance = pc_mahalanobis(gather(z, model.term_map), model);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NullProjection) throw;
    }
    report.distances[model.class_id] = distance;
    if (!std::isfinite(distance)) continue;
    const bool better = best == nullptr || distance < best_distance - 1e-12 ||
                        (distance <= best_distance + 1e-12 && model.class_id < best->class_id);
    if (better) {
      best = &model;
      best_distance = distance;
    }
  }
  if (best == nullptr) throw Error(ErrorCode::AllNull, "query projects to zero in every class");
  report.winner = best->class_id;
  return report;
}

}  // namespace kltext
