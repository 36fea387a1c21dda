#pragma once

// Reference computations used only by tests. Nothing here calls into the
// model, prox or evaluation code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Cholesky>

namespace bwe::testing {

/// x^T W y by explicit loops.
inline double triple_product(const Eigen::VectorXd& x, const Eigen::MatrixXd& w, const Eigen::VectorXd& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) total += x[i] * w(i, j) * y[j];
  }
  return total;
}

/// Softmax in long double without max-shifting.
inline std::vector<double> softmax_long(const std::vector<double>& scores) {
  long double z = 0.0L;
  for (double s : scores) z += std::exp(static_cast<long double>(s));
  std::vector<double> out;
  for (double s : scores) out.push_back(static_cast<double>(std::exp(static_cast<long double>(s)) / z));
  return out;
}

/// -log softmax(scores)[gold] in long double.
inline double neg_log_prob_long(const std::vector<double>& scores, std::size_t gold) {
  long double z = 0.0L;
  for (double s : scores) z += std::exp(static_cast<long double>(s));
  return static_cast<double>(std::log(z) - static_cast<long double>(scores[gold]));
}

struct JacobiSvd {
  Eigen::MatrixXd u;      // m x r
  Eigen::VectorXd sigma;  // r, descending
  Eigen::MatrixXd v;      // n x r
};

/// One-sided Jacobi SVD (Hestenes). Works on the taller orientation and
/// sweeps until every column pair is orthogonal to 1e-15.
inline JacobiSvd jacobi_svd(const Eigen::MatrixXd& a_in) {
  const bool transposed = a_in.rows() < a_in.cols();
  Eigen::MatrixXd a = transposed ? Eigen::MatrixXd(a_in.transpose()) : a_in;
  const Eigen::Index m = a.rows(), n = a.cols();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (Eigen::Index i = 0; i < m; ++i) {
          alpha += a(i, p) * a(i, p);
          beta += a(i, q) * a(i, q);
          gamma += a(i, p) * a(i, q);
        }
        if (alpha == 0.0 || beta == 0.0) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        if (std::abs(gamma) < 1e-300) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
        for (Eigen::Index i = 0; i < m; ++i) {
          const double ap = a(i, p), aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (off < 1e-15) break;
  }
  std::vector<std::pair<double, Eigen::Index>> order;
  for (Eigen::Index j = 0; j < n; ++j) order.push_back({a.col(j).norm(), j});
  std::sort(order.begin(), order.end(), [](auto x, auto y) { return x.first > y.first; });

  JacobiSvd out;
  out.u = Eigen::MatrixXd::Zero(m, n);
  out.sigma.resize(n);
  out.v.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    auto [s, j] = order[static_cast<std::size_t>(k)];
    out.sigma[k] = s;
    out.v.col(k) = v.col(j);
    if (s > 0) out.u.col(k) = a.col(j) / s;
  }
  if (transposed) std::swap(out.u, out.v);
  return out;
}

/// Singular-value soft-threshold built on jacobi_svd.
inline Eigen::MatrixXd svt_oracle(const Eigen::MatrixXd& w, double tau) {
  auto svd = jacobi_svd(w);
  Eigen::VectorXd shrunk = (svd.sigma.array() - tau).cwiseMax(0.0).matrix();
  return svd.u * shrunk.asDiagonal() * svd.v.transpose();
}

/// Best rank-k approximation through jacobi_svd.
inline Eigen::MatrixXd truncate_oracle(const Eigen::MatrixXd& w, Eigen::Index k) {
  auto svd = jacobi_svd(w);
  return svd.u.leftCols(k) * svd.sigma.head(k).asDiagonal() * svd.v.leftCols(k).transpose();
}

/// Minimizes 0.5||X - W||^2 + tau ||X||_F numerically, with no knowledge
/// of the closed form. The norm is smoothed to sqrt(||X||^2 + eps^2) and
/// eps is driven towards 0; each stage runs damped Newton steps on the
/// vectorized problem, so minimizers at or near 0 are found as well.
inline Eigen::MatrixXd frobenius_prox_numeric(const Eigen::MatrixXd& w, double tau) {
  const Eigen::Index n = w.size();
  const Eigen::VectorXd target = w.reshaped();
  Eigen::VectorXd x = target;
  for (double eps = 1.0; eps >= 1e-15; eps *= 1e-2) {
    auto f = [&](const Eigen::VectorXd& v) {
      return 0.5 * (v - target).squaredNorm() + tau * std::sqrt(v.squaredNorm() + eps * eps);
    };
    for (int it = 0; it < 100; ++it) {
      const double s = std::sqrt(x.squaredNorm() + eps * eps);
      Eigen::VectorXd g = x - target + (tau / s) * x;
      if (g.norm() < 1e-15) break;
      Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) * (1.0 + tau / s) - (tau / (s * s * s)) * x * x.transpose();
      Eigen::VectorXd d = -h.ldlt().solve(g);
      double t = 1.0;
      const double f0 = f(x);
      while (t > 1e-20 && f(x + t * d) > f0 + 1e-4 * t * g.dot(d)) t *= 0.5;
      x += t * d;
      if ((t * d).norm() < 1e-17) break;
    }
  }
  return x.reshaped(w.rows(), w.cols());
}

/// Stable order of a score list: descending score, ascending token.
inline std::vector<std::size_t> brute_force_order(const std::vector<double>& scores,
                                                  const std::vector<std::string>& tokens) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // insertion sort, deliberately unrelated to the library's sort path
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0; --j) {
      auto a = idx[j - 1], b = idx[j];
      bool swap = scores[b] > scores[a] || (scores[b] == scores[a] && tokens[b] < tokens[a]);
      if (!swap) break;
      std::swap(idx[j - 1], idx[j]);
    }
  }
  return idx;
}

}  // namespace bwe::testing
