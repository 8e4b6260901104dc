#ifndef KLTEXT_PC_CLASSIFIER_HPP
#define KLTEXT_PC_CLASSIFIER_HPP

#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kltext/corpus.hpp"
#include "kltext/error.hpp"
#include "kltext/kl_decomp.hpp"

namespace kltext {

/// Components lighter than this fraction of the leading one are dropped.
inline constexpr double kComponentFloor = 1e-12;
inline constexpr Eigen::Index kDefaultComponents = 16;

/// Principal-component model of one class over its own coordinates.
struct ClassModel {
  std::string class_id;
  std::vector<TermId> term_map;   // class-local coordinate i is global term term_map[i]
  PrincipalBasis<double> basis;
  Eigen::VectorXd lambda;         // Lambda^k = sum_v alpha^k_v
  Eigen::VectorXd central_unit;   // Xhat / ||Xhat||, Xhat = sum_k Lambda^k Y^k

  Eigen::Index dimension() const { return static_cast<Eigen::Index>(term_map.size()); }

  friend bool operator==(const ClassModel& a, const ClassModel& b) {
    return a.class_id == b.class_id && a.term_map == b.term_map && a.basis == b.basis &&
           a.lambda == b.lambda && a.central_unit == b.central_unit;
  }
};

/// beta^k = <z, Y^k> / <Y^k, Y^k>
template <typename Derived>
Vector<typename Derived::Scalar> project(const Eigen::MatrixBase<Derived>& z,
                                         const PrincipalBasis<typename Derived::Scalar>& basis) {
  if (z.size() != basis.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "query dimension " + std::to_string(z.size()) +
                                                  " vs basis dimension " + std::to_string(basis.dimension()));
  }
  return (basis.components * z).cwiseQuotient(basis.norms_squared);
}

/// ||sum_k c^k Y^k||_2 for mutually orthogonal Y^k.
template <typename DerivedC, typename DerivedN>
typename DerivedC::Scalar combination_norm(const Eigen::MatrixBase<DerivedC>& coeffs,
                                           const Eigen::MatrixBase<DerivedN>& norms_squared) {
  return std::sqrt((coeffs.array().square() * norms_squared.array()).sum());
}

/// Mahalanobis distance in the principal basis between the unit-normalized
/// projection of a query (coefficients `beta`) and the class centre
/// (coefficients `lambda`):
///
///   sum_k (beta^k / ||sum beta Y|| - Lambda^k / ||sum Lambda Y||)^2
///
/// The 1/||Y^k||^2 weights cancel against ||Y^k||^2 because the components
/// are orthogonal.
template <typename DerivedB, typename DerivedL, typename DerivedN>
typename DerivedB::Scalar pc_distance(const Eigen::MatrixBase<DerivedB>& beta,
                                      const Eigen::MatrixBase<DerivedL>& lambda,
                                      const Eigen::MatrixBase<DerivedN>& norms_squared) {
  const auto beta_norm = combination_norm(beta, norms_squared);
  const auto lambda_norm = combination_norm(lambda, norms_squared);
  return (beta / beta_norm - lambda / lambda_norm).squaredNorm();
}

/// Builds the model of one class from its documents' unit vectors. The
/// class-local coordinates are the union of the documents' terms; `m` is
/// capped at the class size.
ClassModel build_class_model(std::string class_id, std::span<const SparseVector> docs,
                             Eigen::Index m = kDefaultComponents, const IterationConfig& cfg = {});

/// Distance of the class-local query `z` to `model`. Throws NullProjection
/// when z has no component inside the class subspace.
double pc_mahalanobis(const Eigen::VectorXd& z, const ClassModel& model);

struct DistanceReport {
  std::map<std::string, double> distances;  // +inf for classes with a null projection
  std::string winner;
};

/// Restricts `z` to each class's coordinates, scores it, and picks the
/// smallest distance (lexicographic tie-break). Throws AllNull when no class
/// sees any part of z.
DistanceReport classify(const SparseVector& z, std::span<const ClassModel> models);

}  // namespace kltext

#endif  // KLTEXT_PC_CLASSIFIER_HPP
