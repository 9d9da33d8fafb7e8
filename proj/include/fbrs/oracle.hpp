#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>

#include "fbrs/qp_core.hpp"

namespace fbrs {

template <typename Scalar>
struct KktReport {
  Scalar stationarity_norm{0};     // ‖Hz + f + Aᵀv‖₂
  Scalar primal_infeasibility{0};  // max(0, max_i (Az − b)_i)
  Scalar dual_infeasibility{0};    // max(0, −min_i v_i)
  Scalar complementarity{0};       // max_i |v_i·y_i|
  bool pass = false;
};

template <typename Scalar>
KktReport<Scalar> verify_kkt(const QpProblem<Scalar>& p,
                             const PrimalDualPoint<Scalar>& x, Scalar tol) {
  const Vector<Scalar> y = constraint_slack(p, x.z);
  KktReport<Scalar> r;
  r.stationarity_norm = lagrangian_gradient(p, x).norm();
  r.primal_infeasibility = std::max(Scalar(0), -y.minCoeff());
  r.dual_infeasibility = std::max(Scalar(0), -x.v.minCoeff());
  r.complementarity = x.v.cwiseProduct(y).cwiseAbs().maxCoeff();
  r.pass = r.stationarity_norm <= tol && r.primal_infeasibility <= tol &&
           r.dual_infeasibility <= tol && r.complementarity <= tol;
  return r;
}

enum class EnumerationStatus { Solved, Infeasible, Unbounded, TooLarge, DegenerateKkt };

inline std::string_view to_string(EnumerationStatus s) {
  switch (s) {
    case EnumerationStatus::Solved: return "Solved";
    case EnumerationStatus::Infeasible: return "Infeasible";
    case EnumerationStatus::Unbounded: return "Unbounded";
    case EnumerationStatus::TooLarge: return "TooLarge";
    case EnumerationStatus::DegenerateKkt: return "DegenerateKkt";
  }
  return "Unknown";
}

template <typename Scalar>
struct EnumerationResult {
  EnumerationStatus status = EnumerationStatus::DegenerateKkt;
  PrimalDualPoint<Scalar> x;
  std::uint32_t active_set = 0;  // bitmask of the accepted subset
};

inline constexpr Eigen::Index kEnumerationMaxN = 8;
inline constexpr Eigen::Index kEnumerationMaxQ = 16;

namespace detail {

template <typename Scalar>
bool lexicographically_less(const Vector<Scalar>& a, const Vector<Scalar>& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

template <typename Scalar>
EnumerationResult<Scalar> enumerate_active_sets(const QpProblem<Scalar>& p,
                                                Scalar tol) {
  using std::abs;
  const auto n = p.n();
  const auto q = p.q();
  EnumerationResult<Scalar> best;
  std::optional<Scalar> best_obj;
  bool any_regular = false;

  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << q); ++mask) {
    const auto s = static_cast<Eigen::Index>(std::popcount(mask));
    if (s > n) continue;

    Matrix<Scalar> A_S(s, n);
    Vector<Scalar> b_S(s);
    for (Eigen::Index i = 0, r = 0; i < q; ++i) {
      if (mask & (std::uint32_t{1} << i)) {
        A_S.row(r) = p.A().row(i);
        b_S(r++) = p.b()(i);
      }
    }
    if (s > 0 && Eigen::FullPivLU<Matrix<Scalar>>(A_S).rank() < s) continue;

    Matrix<Scalar> kkt = Matrix<Scalar>::Zero(n + s, n + s);
    kkt.topLeftCorner(n, n) = p.H();
    kkt.topRightCorner(n, s) = A_S.transpose();
    kkt.bottomLeftCorner(s, n) = A_S;
    Vector<Scalar> rhs(n + s);
    rhs << -p.f(), b_S;
    Eigen::FullPivLU<Matrix<Scalar>> lu(kkt);
    if (!lu.isInvertible()) continue;
    any_regular = true;

    const Vector<Scalar> sol = lu.solve(rhs);
    const Vector<Scalar> z = sol.head(n);
    const Vector<Scalar> y = p.b() - p.A() * z;
    bool accept = true;
    for (Eigen::Index i = 0; i < q && accept; ++i) {
      accept = y(i) >= -tol * (Scalar(1) + abs(p.b()(i)));
    }
    for (Eigen::Index r = 0; r < s && accept; ++r) accept = sol(n + r) >= -tol;
    if (!accept) continue;

    const Scalar obj = objective(p, z);
    const Scalar obj_tol = Scalar(1e-12) * (Scalar(1) + abs(obj));
    const bool better =
        !best_obj || obj < *best_obj - obj_tol ||
        (obj <= *best_obj + obj_tol && lexicographically_less(z, best.x.z));
    if (!better) continue;

    best_obj = obj;
    best.x.z = z;
    best.x.v = Vector<Scalar>::Zero(q);
    for (Eigen::Index i = 0, r = 0; i < q; ++i) {
      if (mask & (std::uint32_t{1} << i)) best.x.v(i) = sol(n + r++);
    }
    best.active_set = mask;
  }

  if (best_obj) {
    best.status = EnumerationStatus::Solved;
  } else {
    best.status = any_regular ? EnumerationStatus::Infeasible
                              : EnumerationStatus::DegenerateKkt;
  }
  return best;
}

}  // namespace detail

/**
 * Exact solution of a small QP by enumerating candidate active sets.
 *
 * For every subset S with |S| ≤ n and A_S of full row rank, the bordered
 * system [H A_Sᵀ; A_S 0](z, v_S) = (−f, b_S) is solved; the candidate is kept
 * if Az ≤ b and v_S ≥ 0 up to tol. Among accepted candidates the lowest
 * objective wins, ties broken by lexicographically smallest z.
 *
 * When no candidate is accepted, a second sweep minimizes ½‖z‖² over the
 * same constraints to tell an empty feasible set from an unbounded objective.
 */
template <typename Scalar>
EnumerationResult<Scalar> solve_by_enumeration(const QpProblem<Scalar>& p,
                                               Scalar tol = Scalar(1e-9)) {
  if (p.n() > kEnumerationMaxN || p.q() > kEnumerationMaxQ) {
    EnumerationResult<Scalar> r;
    r.status = EnumerationStatus::TooLarge;
    return r;
  }
  auto result = detail::enumerate_active_sets(p, tol);
  if (result.status != EnumerationStatus::Infeasible) return result;

  const QpProblem<Scalar> feasibility(Matrix<Scalar>::Identity(p.n(), p.n()),
                                      Vector<Scalar>::Zero(p.n()), p.A(),
                                      p.b());
  const auto sweep = detail::enumerate_active_sets(feasibility, tol);
  if (sweep.status == EnumerationStatus::Solved) {
    result.status = EnumerationStatus::Unbounded;
  }
  return result;
}

}  // namespace fbrs
