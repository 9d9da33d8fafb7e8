#pragma once

#include <cmath>

#include "fbrs/qp_core.hpp"

namespace fbrs {

/// Which element of the generalized Jacobian the Newton matrix uses.
enum class Variant {
  Smoothed,    // ε > 0, classical Jacobian of F_ε
  Semismooth,  // ε ≥ 0, fixed selection at the kink
};

/// Smoothed Fischer-Burmeister function a + b − √(a² + b² + ε²).
///
/// The root is evaluated with a three-argument hypot so |a|, |b| near the
/// overflow threshold stay finite.
template <typename Scalar>
Scalar phi_eps(Scalar a, Scalar b, Scalar eps) {
  using std::hypot;
  return a + b - hypot(a, b, eps);
}

/// Elementwise φ_ε(a_i, b_i).
template <typename DerivedA, typename DerivedB>
auto phi_eps(const Eigen::MatrixBase<DerivedA>& a,
             const Eigen::MatrixBase<DerivedB>& b,
             typename DerivedA::Scalar eps) {
  using Scalar = typename DerivedA::Scalar;
  eigen_assert(a.size() == b.size());
  Vector<Scalar> out(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out(i) = phi_eps(a(i), b(i), eps);
  }
  return out;
}

/// Partial derivatives (∂φ_ε/∂a, ∂φ_ε/∂b) for ε > 0 or (a, b) ≠ 0.
template <typename Scalar>
std::pair<Scalar, Scalar> phi_eps_gradient(Scalar a, Scalar b, Scalar eps) {
  using std::hypot;
  const Scalar r = hypot(a, b, eps);
  return {Scalar(1) - a / r, Scalar(1) - b / r};
}

/// Diagonals of C = diag(γ) and D = diag(μ) in the Newton matrix.
template <typename Scalar>
struct FbCoefficients {
  Vector<Scalar> gamma;
  Vector<Scalar> mu;
  Scalar epsilon{0};
  Scalar delta{0};
};

/**
 * γ_i = 1 − y_i/r_i + δ,  μ_i = 1 − v_i/r_i + δ,  r_i = √(y_i² + v_i² + ε²).
 *
 * When r_i = 0 (semismooth variant at ε = 0, y_i = v_i = 0) the generalized
 * Jacobian is set-valued; we pick α = β = 1/√2, so γ_i = μ_i = 1 − 1/√2 + δ.
 */
template <typename Scalar>
FbCoefficients<Scalar> fb_coefficients(const Vector<Scalar>& y,
                                       const Vector<Scalar>& v, Scalar eps,
                                       Scalar delta, Variant variant) {
  if (eps < 0 || !std::isfinite(static_cast<double>(eps))) {
    throw InvalidConfig("smoothing parameter must be finite and nonnegative");
  }
  if (delta < 0) throw InvalidConfig("regularization must be nonnegative");
  if (variant == Variant::Smoothed && eps == 0) {
    throw InvalidConfig("smoothed variant requires a positive epsilon");
  }
  eigen_assert(y.size() == v.size());

  using std::hypot;
  using std::sqrt;
  const Scalar tie = Scalar(1) - Scalar(1) / sqrt(Scalar(2));

  FbCoefficients<Scalar> c;
  c.gamma.resize(y.size());
  c.mu.resize(y.size());
  c.epsilon = eps;
  c.delta = delta;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const Scalar r = hypot(y(i), v(i), eps);
    if (r == 0) {
      c.gamma(i) = tie + delta;
      c.mu(i) = tie + delta;
    } else {
      c.gamma(i) = Scalar(1) - y(i) / r + delta;
      c.mu(i) = Scalar(1) - v(i) / r + delta;
    }
  }
  return c;
}

/// F_ε(x) = [∇_z L(z, v); φ_ε(v, y)]
template <typename Scalar>
Vector<Scalar> residual_map(const QpProblem<Scalar>& p,
                            const PrimalDualPoint<Scalar>& x, Scalar eps) {
  Vector<Scalar> F(p.n() + p.q());
  F.head(p.n()) = lagrangian_gradient(p, x);
  F.tail(p.q()) = phi_eps(x.v, constraint_slack(p, x.z), eps);
  return F;
}

template <typename Scalar>
ResidualSplit<Scalar> residual_split(const QpProblem<Scalar>& p,
                                     const PrimalDualPoint<Scalar>& x,
                                     Scalar eps) {
  ResidualSplit<Scalar> r;
  r.constraint_slack = constraint_slack(p, x.z);
  r.stationarity = -lagrangian_gradient(p, x);
  r.complementarity = -phi_eps(x.v, r.constraint_slack, eps);
  return r;
}

template <typename Scalar>
struct SmoothingGap {
  Scalar gap;    // ‖F_ε(x) − F₀(x)‖₂
  Scalar bound;  // √q·ε
};

template <typename Scalar>
SmoothingGap<Scalar> smoothing_gap_bound_check(const QpProblem<Scalar>& p,
                                               const PrimalDualPoint<Scalar>& x,
                                               Scalar eps) {
  using std::sqrt;
  const Scalar gap =
      (residual_map(p, x, eps) - residual_map(p, x, Scalar(0))).norm();
  return {gap, sqrt(static_cast<Scalar>(p.q())) * eps};
}

}  // namespace fbrs
