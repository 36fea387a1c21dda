#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace bwe {

enum class Regularizer {
  frobenius,          // lambda * ||W||_F
  frobenius_squared,  // lambda * 0.5 * ||W||_F^2
  trace,              // lambda * sum of singular values
};

/// Block soft-threshold: argmin_X 0.5||X - W||_F^2 + tau ||X||_F.
Eigen::MatrixXd prox_frobenius(const Eigen::MatrixXd& w, double tau);

/// argmin_X 0.5||X - W||_F^2 + 0.5 tau ||X||_F^2 = W / (1 + tau).
Eigen::MatrixXd prox_frobenius_squared(const Eigen::MatrixXd& w, double tau);

/// Singular-value soft-threshold: U max(S - tau, 0) V^T.
/// Throws NumericalError if the SVD fails.
Eigen::MatrixXd prox_trace(const Eigen::MatrixXd& w, double tau);

Eigen::MatrixXd prox(Regularizer reg, const Eigen::MatrixXd& w, double tau);

/// Value of the (unscaled) regularizer at W.
double regularizer_value(Regularizer reg, const Eigen::MatrixXd& w);

/// Singular values, descending. Throws NumericalError on failure.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& w);

/// Number of singular values above rel_tol * sigma_max (0 for W = 0).
std::size_t numerical_rank(const Eigen::MatrixXd& w, double rel_tol = 1e-8);

}  // namespace bwe
