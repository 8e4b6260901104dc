#ifndef KLTEXT_BAYES_HPP
#define KLTEXT_BAYES_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "kltext/corpus.hpp"
#include "kltext/error.hpp"
#include "kltext/kl_decomp.hpp"

namespace kltext {

struct BayesClassStats {
  std::string class_id;
  std::int64_t doc_count = 0;
  double prior = 0.0;
  std::int64_t term_total = 0;                  // sum of all counters
  std::map<TermId, std::int64_t> counters;      // n(w, C)

  friend bool operator==(const BayesClassStats&, const BayesClassStats&) = default;
};

/// Multinomial term model with additive smoothing.
struct BayesModel {
  double smoothing = 1.0;
  std::size_t vocabulary_size = 0;
  std::vector<BayesClassStats> classes;

  friend bool operator==(const BayesModel&, const BayesModel&) = default;
};

BayesModel fit_bayes(const LabeledDataset& dataset, double smoothing = 1.0);

/// P(class | doc) from the raw counts of `doc`, evaluated in log space and
/// normalized to sum to one.
std::map<std::string, double> posterior(const BayesModel& model, const Document& doc);

/// Log of P(class) P(doc | class), per class in model order.
std::vector<double> log_joint(const BayesModel& model, const SparseVector& counts);

/// exp(v_i) / sum_j exp(v_j), computed stably.
std::vector<double> normalize_log_joint(std::span<const double> log_joint);

/// Argmax of the posterior; ties go to the lexicographically smallest id.
std::string bayes_classify(const BayesModel& model, const Document& doc);

// Full-covariance Gaussian quantities. These are meant for small dimensions
// where inverting the covariance is stable; they also serve as reference
// values for the principal-component classifier.

template <typename Scalar>
struct CovarianceModel {
  Vector<Scalar> mean;
  Matrix<Scalar> covariance;

  Eigen::Index dimension() const { return mean.size(); }
};

namespace detail {

/// Eigenvalues and eigenvectors of a validated, nonsingular covariance.
template <typename Scalar>
Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> covariance_spectrum(const CovarianceModel<Scalar>& model,
                                                                  Eigen::Index x_size) {
  const Eigen::Index n = model.dimension();
  if (model.covariance.rows() != n || model.covariance.cols() != n || x_size != n) {
    throw Error(ErrorCode::DimensionMismatch, "covariance, mean and point must share one dimension");
  }
  if ((model.covariance - model.covariance.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-9)) {
    throw Error(ErrorCode::InvalidArgument, "covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(model.covariance);
  const auto& ev = solver.eigenvalues();
  const Scalar largest = ev.maxCoeff();
  if (!(largest > Scalar(0)) || ev.minCoeff() <= Scalar(1e-12) * largest) {
    throw Error(ErrorCode::SingularCovariance, "covariance is singular or not positive definite");
  }
  return solver;
}

template <typename Scalar, typename Derived>
Scalar quadratic_form(const Eigen::SelfAdjointEigenSolver<Matrix<Scalar>>& solver,
                      const Eigen::MatrixBase<Derived>& diff) {
  const Vector<Scalar> rotated = solver.eigenvectors().transpose() * diff;
  return (rotated.array().square() / solver.eigenvalues().array()).sum();
}

}  // namespace detail

/// sqrt((x - mu) Sigma^-1 (x - mu)^T)
template <typename Derived>
typename Derived::Scalar mahalanobis_full(const Eigen::MatrixBase<Derived>& x,
                                          const CovarianceModel<typename Derived::Scalar>& model) {
  using Scalar = typename Derived::Scalar;
  const auto solver = detail::covariance_spectrum(model, x.size());
  const Vector<Scalar> diff = x - model.mean;
  return std::sqrt(detail::quadratic_form(solver, diff));
}

/// Multivariate normal density (2 pi)^{-n/2} |Sigma|^{-1/2} exp(-q/2).
template <typename Derived>
typename Derived::Scalar gaussian_density(const Eigen::MatrixBase<Derived>& x,
                                          const CovarianceModel<typename Derived::Scalar>& model) {
  using Scalar = typename Derived::Scalar;
  const auto solver = detail::covariance_spectrum(model, x.size());
  const Vector<Scalar> diff = x - model.mean;
  const Scalar q = detail::quadratic_form(solver, diff);
  const Scalar log_det = solver.eigenvalues().array().log().sum();
  const Scalar n = static_cast<Scalar>(model.dimension());
  const Scalar log_norm = Scalar(0.5) * (n * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) + log_det);
  return std::exp(Scalar(-0.5) * q - log_norm);
}

}  // namespace kltext

#endif  // KLTEXT_BAYES_HPP
