#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>

#include "fbrs/errors.hpp"

namespace fbrs {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/**
 * Dense convex QP
 *
 *   minimize    ½ zᵀHz + fᵀz
 *   subject to  Az ≤ b
 *
 * with n decision variables and q ≥ 1 inequality rows. H is symmetrized on
 * construction; the asymmetry of the input is kept for reporting.
 */
template <typename Scalar>
class QpProblem {
 public:
  QpProblem(Matrix<Scalar> H, Vector<Scalar> f, Matrix<Scalar> A,
            Vector<Scalar> b)
      : H_(std::move(H)), f_(std::move(f)), A_(std::move(A)), b_(std::move(b)) {
    const auto n = H_.rows();
    if (n == 0) throw InvalidProblem("n must be positive");
    if (H_.cols() != n) throw InvalidProblem("H must be square");
    if (f_.size() != n) throw InvalidProblem("f must have n entries");
    if (A_.rows() == 0) throw InvalidProblem("q must be positive");
    if (A_.cols() != n) throw InvalidProblem("A must have n columns");
    if (b_.size() != A_.rows()) throw InvalidProblem("b must have q entries");
    if (!H_.allFinite() || !f_.allFinite() || !A_.allFinite() ||
        !b_.allFinite()) {
      throw InvalidProblem("problem data contains non-finite entries");
    }
    input_asymmetry_ = (H_ - H_.transpose()).norm();
    Matrix<Scalar> sym = (H_ + H_.transpose()) / Scalar(2);
    H_ = std::move(sym);
  }

  Eigen::Index n() const { return H_.rows(); }
  Eigen::Index q() const { return A_.rows(); }

  const Matrix<Scalar>& H() const { return H_; }
  const Vector<Scalar>& f() const { return f_; }
  const Matrix<Scalar>& A() const { return A_; }
  const Vector<Scalar>& b() const { return b_; }

  /// ‖H − Hᵀ‖_F of the matrix passed to the constructor.
  Scalar input_asymmetry() const { return input_asymmetry_; }

 private:
  Matrix<Scalar> H_;
  Vector<Scalar> f_;
  Matrix<Scalar> A_;
  Vector<Scalar> b_;
  Scalar input_asymmetry_{0};
};

/// Primal-dual iterate x = (z, v). Duals carry no sign constraint.
template <typename Scalar>
struct PrimalDualPoint {
  Vector<Scalar> z;
  Vector<Scalar> v;

  static PrimalDualPoint Zero(Eigen::Index n, Eigen::Index q) {
    return {Vector<Scalar>::Zero(n), Vector<Scalar>::Zero(q)};
  }

  /// Stacked (z, v) as a single (n+q)-vector.
  Vector<Scalar> stacked() const {
    Vector<Scalar> x(z.size() + v.size());
    x << z, v;
    return x;
  }

  static PrimalDualPoint FromStacked(const Vector<Scalar>& x, Eigen::Index n) {
    return {x.head(n), x.tail(x.size() - n)};
  }
};

template <typename Scalar>
bool dimensions_match(const QpProblem<Scalar>& p,
                      const PrimalDualPoint<Scalar>& x) {
  return x.z.size() == p.n() && x.v.size() == p.q();
}

template <typename Scalar>
void require_dimensions(const QpProblem<Scalar>& p,
                        const PrimalDualPoint<Scalar>& x) {
  if (!dimensions_match(p, x)) {
    throw InvalidProblem("iterate dimensions do not match the problem");
  }
}

/// y = b − Az
template <typename Scalar>
Vector<Scalar> constraint_slack(const QpProblem<Scalar>& p,
                                const Vector<Scalar>& z) {
  return p.b() - p.A() * z;
}

/// ∇_z L = Hz + f + Aᵀv
template <typename Scalar>
Vector<Scalar> lagrangian_gradient(const QpProblem<Scalar>& p,
                                   const PrimalDualPoint<Scalar>& x) {
  require_dimensions(p, x);
  return p.H() * x.z + p.f() + p.A().transpose() * x.v;
}

template <typename Scalar>
Scalar objective(const QpProblem<Scalar>& p, const Vector<Scalar>& z) {
  return Scalar(0.5) * z.dot(p.H() * z) + p.f().dot(z);
}

/// [∇_z L; min(y, v)], zero exactly at KKT points.
template <typename Scalar>
Vector<Scalar> natural_residual(const QpProblem<Scalar>& p,
                                const PrimalDualPoint<Scalar>& x) {
  Vector<Scalar> r(p.n() + p.q());
  r.head(p.n()) = lagrangian_gradient(p, x);
  r.tail(p.q()) = constraint_slack(p, x.z).cwiseMin(x.v);
  return r;
}

/// Right-hand side pieces of the Newton system at a given iterate.
template <typename Scalar>
struct ResidualSplit {
  Vector<Scalar> stationarity;      // r_s = −∇_z L
  Vector<Scalar> complementarity;   // r_c = −φ_ε(v, y)
  Vector<Scalar> constraint_slack;  // y = b − Az
};

struct ValidationReport {
  double symmetry_defect = 0;   // after symmetrization
  double input_asymmetry = 0;   // before symmetrization
  double sigma_min = 0;         // of the stacked [H; A]
  double sigma_max = 0;
  bool asymmetry_warning = false;
  bool symmetric_ok = false;
  bool kernel_ok = false;       // ker H ∩ ker A = {0}
  bool pass = false;
};

/**
 * Checks symmetry and the kernel condition ker H ∩ ker A = {0}.
 *
 * The kernel condition holds iff the stacked (n+q)×n matrix [H; A] has full
 * column rank, tested as σ_min > tol·σ_max. Input asymmetry above 1e-8
 * relative only raises a warning since H has already been symmetrized.
 */
template <typename Scalar>
ValidationReport validate_problem(const QpProblem<Scalar>& p,
                                  Scalar tol = Scalar(1e-10)) {
  ValidationReport report;
  const Scalar h_norm = p.H().norm();
  report.symmetry_defect =
      static_cast<double>((p.H() - p.H().transpose()).norm());
  report.input_asymmetry = static_cast<double>(p.input_asymmetry());
  report.asymmetry_warning =
      p.input_asymmetry() > Scalar(1e-8) * (Scalar(1) + h_norm);
  report.symmetric_ok =
      report.symmetry_defect <= static_cast<double>(tol * (Scalar(1) + h_norm));

  Matrix<Scalar> stacked(p.n() + p.q(), p.n());
  stacked << p.H(), p.A();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(stacked);
  const auto& sv = svd.singularValues();
  report.sigma_max = static_cast<double>(sv(0));
  report.sigma_min = static_cast<double>(sv(sv.size() - 1));
  report.kernel_ok = sv(sv.size() - 1) > tol * sv(0);
  report.pass = report.symmetric_ok && report.kernel_ok;
  return report;
}

}  // namespace fbrs
