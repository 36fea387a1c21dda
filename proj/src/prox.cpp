#include "bwe/prox.hpp"

#include <algorithm>

#include <Eigen/SVD>

#include "bwe/errors.hpp"

namespace bwe {

namespace {

using Svd = Eigen::BDCSVD<Eigen::MatrixXd>;

void check_tau(double tau) {
  if (!(tau >= 0.0)) throw Error("prox: tau must be non-negative");
}

void check(const Svd& svd) {
  if (svd.info() != Eigen::Success || !svd.singularValues().allFinite()) {
    throw NumericalError("SVD failed to converge");
  }
}

}  // namespace

Eigen::MatrixXd prox_frobenius(const Eigen::MatrixXd& w, double tau) {
  check_tau(tau);
  const double norm = w.norm();
  if (norm <= tau) return Eigen::MatrixXd::Zero(w.rows(), w.cols());
  return w * (1.0 - tau / norm);
}

Eigen::MatrixXd prox_frobenius_squared(const Eigen::MatrixXd& w, double tau) {
  check_tau(tau);
  return w / (1.0 + tau);
}

Eigen::MatrixXd prox_trace(const Eigen::MatrixXd& w, double tau) {
  check_tau(tau);
  if (w.size() == 0) return w;
  Svd svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  check(svd);
  Eigen::VectorXd shrunk = (svd.singularValues().array() - tau).cwiseMax(0.0).matrix();
  Eigen::Index kept = 0;
  while (kept < shrunk.size() && shrunk[kept] > 0.0) ++kept;
  if (kept == 0) return Eigen::MatrixXd::Zero(w.rows(), w.cols());
  return svd.matrixU().leftCols(kept) * shrunk.head(kept).asDiagonal() *
         svd.matrixV().leftCols(kept).transpose();
}

Eigen::MatrixXd prox(Regularizer reg, const Eigen::MatrixXd& w, double tau) {
  switch (reg) {
    case Regularizer::frobenius:
      return prox_frobenius(w, tau);
    case Regularizer::frobenius_squared:
      return prox_frobenius_squared(w, tau);
    case Regularizer::trace:
      return prox_trace(w, tau);
  }
  throw Error("prox: unknown regularizer");
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& w) {
  if (w.size() == 0) return {};
  Svd svd(w);
  check(svd);
  return svd.singularValues();
}

double regularizer_value(Regularizer reg, const Eigen::MatrixXd& w) {
  switch (reg) {
    case Regularizer::frobenius:
      return w.norm();
    case Regularizer::frobenius_squared:
      return 0.5 * w.squaredNorm();
    case Regularizer::trace:
      return singular_values(w).sum();
  }
  throw Error("regularizer_value: unknown regularizer");
}

std::size_t numerical_rank(const Eigen::MatrixXd& w, double rel_tol) {
  auto s = singular_values(w);
  if (s.size() == 0 || s[0] <= 0.0) return 0;
  const double cutoff = rel_tol * s[0];
  return static_cast<std::size_t>((s.array() > cutoff).count());
}

}  // namespace bwe
