#ifndef KLTEXT_KL_DECOMP_HPP
#define KLTEXT_KL_DECOMP_HPP

/*
 Iterative Karhunen-Loeve decomposition.

 Rows of the data matrix X are the vectors X^0 .. X^{n-1}. Each principal
 component ("domain") Y is found by alternating least squares on

     sum_k || X^k - a_k Y ||^2   subject to   sum_k a_k^2 = 1

 which reduces to the normalized power iteration

     Y(i)    = sum_k a_k(i) X^k          (Y = X^T a)
     a*_k(i) = <Y(i), X^k>               (a* = X Y)
     a(i+1)  = a*(i) / ||a*(i)||

 started from a_k(0) = 1/sqrt(n). Once a has stabilized, the rank-one part
 a Y^T is subtracted (deflation) and the process repeats on the residual.

 At convergence a^mu is the mu-th unit eigenvector of the Gram matrix
 X X^T and ||Y^mu||^2 its eigenvalue, so the coefficient vectors are
 orthonormal, the components mutually orthogonal, and
 sum ||Y^mu||^2 = sum ||X^k||^2 after a full decomposition.
*/

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kltext/error.hpp"

namespace kltext {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct IterationConfig {
  int max_iterations = 100;
  /// Stop once max_k |a_k(i+1) - a_k(i)| falls below this.
  double tolerance = 1e-9;

  void validate() const {
    if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
    if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be > 0");
  }
};

template <typename Scalar>
struct ComponentResult {
  Vector<Scalar> component;  // Y, length d
  Vector<Scalar> alpha;      // unit coefficient vector, length n
  int iterations = 0;
  bool converged = false;
};

template <typename Scalar>
struct PrincipalBasis {
  Matrix<Scalar> components;     // m x d, row mu is Y^mu
  Matrix<Scalar> coefficients;   // m x n, row mu is alpha^mu
  Vector<Scalar> norms_squared;  // ||Y^mu||^2, non-increasing
  std::vector<int> iterations;   // power iterations spent per component
  bool rank_deficient = false;   // residual vanished before m components

  Eigen::Index size() const { return components.rows(); }
  Eigen::Index dimension() const { return components.cols(); }
  Eigen::Index source_count() const { return coefficients.cols(); }

  friend bool operator==(const PrincipalBasis& a, const PrincipalBasis& b) {
    return a.components == b.components && a.coefficients == b.coefficients &&
           a.norms_squared == b.norms_squared && a.iterations == b.iterations &&
           a.rank_deficient == b.rank_deficient;
  }
};

/// Residual energy below this fraction of the input energy counts as zero.
inline constexpr double kResidualFloor = 1e-12;

/// Leading component of the rows of `data` by normalized power iteration.
/// Hitting the iteration cap is not an error: the last iterate is returned
/// with `converged == false`.
template <typename Derived>
ComponentResult<typename Derived::Scalar> first_component(const Eigen::MatrixBase<Derived>& data,
                                                          const IterationConfig& cfg = {}) {
  using Scalar = typename Derived::Scalar;
  cfg.validate();
  const Eigen::Index n = data.rows();
  if (n < 1 || data.cols() < 1) throw Error(ErrorCode::InvalidArgument, "data matrix must be non-empty");
  const Scalar energy = data.squaredNorm();
  if (energy == Scalar(0)) throw Error(ErrorCode::ZeroData, "all rows are zero");
  // An update at rounding level relative to the data energy carries no direction.
  const Scalar vanishing = Scalar(1000) * std::numeric_limits<Scalar>::epsilon() * energy;

  ComponentResult<Scalar> out;
  out.alpha = Vector<Scalar>::Constant(n, Scalar(1) / std::sqrt(Scalar(n)));
  out.component = data.transpose() * out.alpha;
  bool restarted = false;

  for (int i = 1; i <= cfg.max_iterations; ++i) {
    out.iterations = i;
    Vector<Scalar> next = data * out.component;
    const Scalar norm = next.norm();
    if (norm <= vanishing || !std::isfinite(static_cast<double>(norm))) {
      // The uniform start is orthogonal to every nonzero direction (rows
      // cancel in the sum). Restart from the heaviest row, whose Gram
      // column has norm at least energy / n.
      if (restarted) throw Error(ErrorCode::ZeroData, "coefficient update vanished");
      restarted = true;
      Eigen::Index heaviest = 0;
      data.rowwise().squaredNorm().maxCoeff(&heaviest);
      out.alpha = Vector<Scalar>::Unit(n, heaviest);
      out.component = data.transpose() * out.alpha;
      continue;
    }
    next /= norm;
    // Align signs before measuring the change.
    const Scalar change = next.dot(out.alpha) < Scalar(0) ? (next + out.alpha).cwiseAbs().maxCoeff()
                                                            : (next - out.alpha).cwiseAbs().maxCoeff();
    out.alpha = std::move(next);
    out.component = data.transpose() * out.alpha;
    if (static_cast<double>(change) < cfg.tolerance) {
      out.converged = true;
      break;
    }
  }

  // Canonical sign: the largest-magnitude coefficient is positive.
  Eigen::Index peak = 0;
  out.alpha.cwiseAbs().maxCoeff(&peak);
  if (out.alpha[peak] < Scalar(0)) {
    out.alpha = -out.alpha;
    out.component = -out.component;
  }
  return out;
}

/// Row k of the result is X^k - alpha_k Y.
template <typename Derived, typename DerivedY, typename DerivedA>
Matrix<typename Derived::Scalar> deflate(const Eigen::MatrixBase<Derived>& data,
                                         const Eigen::MatrixBase<DerivedY>& component,
                                         const Eigen::MatrixBase<DerivedA>& alpha) {
  if (component.size() != data.cols() || alpha.size() != data.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "deflation shapes disagree");
  }
  return data - alpha * component.transpose();
}

/// Up to `m` components by repeated first_component + deflate. When the
/// residual vanishes early the basis is truncated and flagged
/// rank-deficient.
template <typename Derived>
PrincipalBasis<typename Derived::Scalar> decompose(const Eigen::MatrixBase<Derived>& data, Eigen::Index m,
                                                   const IterationConfig& cfg = {}) {
  using Scalar = typename Derived::Scalar;
  cfg.validate();
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (m < 1 || m > n) {
    throw Error(ErrorCode::InvalidArgument,
                "component count " + std::to_string(m) + " outside [1, " + std::to_string(n) + "]");
  }
  const Scalar total = data.squaredNorm();
  if (total == Scalar(0)) throw Error(ErrorCode::ZeroData, "all rows are zero");

  PrincipalBasis<Scalar> basis;
  basis.components.resize(m, d);
  basis.coefficients.resize(m, n);
  basis.norms_squared.resize(m);

  Matrix<Scalar> residual = data;
  Eigen::Index found = 0;
  for (; found < m; ++found) {
    if (static_cast<double>(residual.squaredNorm()) <= kResidualFloor * static_cast<double>(total)) {
      basis.rank_deficient = true;
      break;
    }
    auto comp = first_component(residual, cfg);
    basis.components.row(found) = comp.component.transpose();
    basis.coefficients.row(found) = comp.alpha.transpose();
    basis.norms_squared[found] = comp.component.squaredNorm();
    basis.iterations.push_back(comp.iterations);
    residual = deflate(residual, comp.component, comp.alpha);
  }
  if (found < m) {
    basis.components.conservativeResize(found, d);
    basis.coefficients.conservativeResize(found, n);
    basis.norms_squared.conservativeResize(found);
  }
  return basis;
}

/// sum_{k<m} alpha^k_v Y^k
template <typename Scalar>
Vector<Scalar> reconstruct(const PrincipalBasis<Scalar>& basis, Eigen::Index m, Eigen::Index v) {
  if (m < 0 || m > basis.size()) throw Error(ErrorCode::IndexOutOfRange, "component count " + std::to_string(m));
  if (v < 0 || v >= basis.source_count()) throw Error(ErrorCode::IndexOutOfRange, "row " + std::to_string(v));
  return basis.components.topRows(m).transpose() * basis.coefficients.col(v).head(m);
}

/// All m-term reconstructions, one per row.
template <typename Scalar>
Matrix<Scalar> reconstruct_all(const PrincipalBasis<Scalar>& basis, Eigen::Index m) {
  if (m < 0 || m > basis.size()) throw Error(ErrorCode::IndexOutOfRange, "component count " + std::to_string(m));
  return basis.coefficients.topRows(m).transpose() * basis.components.topRows(m);
}

/// Energy of the components left out of an m-term reconstruction.
template <typename Scalar>
Scalar tail_energy(const PrincipalBasis<Scalar>& basis, Eigen::Index m) {
  if (m < 0 || m > basis.size()) throw Error(ErrorCode::IndexOutOfRange, "component count " + std::to_string(m));
  return basis.norms_squared.tail(basis.size() - m).sum();
}

}  // namespace kltext

#endif  // KLTEXT_KL_DECOMP_HPP
