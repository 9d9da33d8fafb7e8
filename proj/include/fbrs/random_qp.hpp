#pragma once

#include <cmath>
#include <random>

#include "fbrs/qp_core.hpp"

namespace fbrs {

/// Knobs for random strictly convex test instances.
struct RandomQpOptions {
  double hessian_shift = 1e-2;  // H = MᵀM + shift·I
  double linear_scale = 3.0;    // f ~ N(0, scale²)
  double min_slack = 0.1;       // b = A z₀ + s, s ~ U(min_slack, max_slack)
  double max_slack = 1.0;
  double max_row_cosine = 0.95; // rows closer than this to parallel are resampled
};

template <typename Scalar = double, typename Rng>
Vector<Scalar> random_normal_vector(Rng& rng, Eigen::Index size,
                                    double stddev = 1.0) {
  std::normal_distribution<double> normal(0.0, stddev);
  Vector<Scalar> v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = static_cast<Scalar>(normal(rng));
  return v;
}

/**
 * Strictly convex QP with a nonempty interior.
 *
 * H is positive definite, so the kernel condition holds for any A. Rows of A
 * are resampled while nearly parallel to an earlier row, which keeps active
 * sets of at most n rows well conditioned in generic position. b places a
 * random z₀ strictly inside the feasible set.
 */
template <typename Scalar = double, typename Rng>
QpProblem<Scalar> random_strictly_convex_qp(Rng& rng, Eigen::Index n,
                                            Eigen::Index q,
                                            const RandomQpOptions& opts = {}) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> slack(opts.min_slack, opts.max_slack);

  Matrix<Scalar> M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) M(i, j) = static_cast<Scalar>(normal(rng));
  Matrix<Scalar> H = M.transpose() * M / static_cast<Scalar>(n);
  H.diagonal().array() += static_cast<Scalar>(opts.hessian_shift);

  const Vector<Scalar> f = random_normal_vector<Scalar>(rng, n, opts.linear_scale);

  Matrix<Scalar> A(q, n);
  for (Eigen::Index i = 0; i < q; ++i) {
    for (int attempt = 0;; ++attempt) {
      Vector<Scalar> row = random_normal_vector<Scalar>(rng, n);
      row.normalize();
      bool distinct = true;
      for (Eigen::Index j = 0; j < i && distinct; ++j) {
        using std::abs;
        distinct = abs(A.row(j).dot(row)) <= opts.max_row_cosine;
      }
      if (distinct || attempt > 100) {
        A.row(i) = row.transpose();
        break;
      }
    }
  }

  const Vector<Scalar> z0 = random_normal_vector<Scalar>(rng, n);
  Vector<Scalar> b = A * z0;
  for (Eigen::Index i = 0; i < q; ++i) b(i) += static_cast<Scalar>(slack(rng));
  return QpProblem<Scalar>(std::move(H), f, std::move(A), std::move(b));
}

/// Far, sign-mixed primal-dual start; generally infeasible.
template <typename Scalar = double, typename Rng>
PrimalDualPoint<Scalar> random_start(Rng& rng, Eigen::Index n, Eigen::Index q,
                                     double scale = 10.0) {
  return {random_normal_vector<Scalar>(rng, n, scale),
          random_normal_vector<Scalar>(rng, q, scale)};
}

}  // namespace fbrs
