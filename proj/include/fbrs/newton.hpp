#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "fbrs/fb_kernel.hpp"
#include "fbrs/qp_core.hpp"

namespace fbrs {

enum class EpsilonPolicy {
  FixedFromTol,  // ε = τ / (2√q), constant for the whole solve
  Explicit,      // ε = SolverConfig::eps
};

enum class SolvePath { Auto, FullLu, CondensedCholesky };

/// Termination test applied to each iterate.
enum class Criterion {
  F0,               // ‖F₀(x)‖ ≤ τ
  NaturalResidual,  // ‖F_NR(x)‖ ≤ τ
};

enum class SolveStatus { Solved, MaxIters, LinesearchFailure, InvalidProblem };

enum class LinearSolveStatus { Ok, SingularSystem, CholeskyFailure };

enum class StepKind { None, Newton, GradientDescent };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Solved: return "Solved";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::LinesearchFailure: return "LinesearchFailure";
    case SolveStatus::InvalidProblem: return "InvalidProblem";
  }
  return "Unknown";
}

template <typename Scalar>
struct SolverConfig {
  Scalar tol = Scalar(1e-8);
  int max_iters = 30;
  Scalar sigma = Scalar(1e-4);
  Scalar beta = Scalar(0.7);
  Scalar delta0 = Scalar(1e-8);
  EpsilonPolicy eps_policy = EpsilonPolicy::FixedFromTol;
  Scalar eps = Scalar(0);
  Variant variant = Variant::Smoothed;
  SolvePath solve_path = SolvePath::Auto;
  int max_backtracks = 40;
  /// δ ← min(δ, ‖F_ε(x)‖) each iteration; off gives a fixed δ = δ₀.
  bool update_delta = true;
  Criterion criterion = Criterion::F0;
  /// Run validate_problem before iterating.
  bool check_problem = true;

  void validate() const {
    if (!(tol > 0)) throw InvalidConfig("tol must be positive");
    if (max_iters < 1) throw InvalidConfig("max_iters must be positive");
    if (!(sigma > 0 && sigma < Scalar(0.5))) {
      throw InvalidConfig("sigma must lie in (0, 0.5)");
    }
    if (!(beta > 0 && beta < 1)) throw InvalidConfig("beta must lie in (0, 1)");
    if (!(delta0 >= 0)) throw InvalidConfig("delta0 must be nonnegative");
    if (max_backtracks < 1) {
      throw InvalidConfig("max_backtracks must be positive");
    }
    if (eps_policy == EpsilonPolicy::Explicit && !(eps >= 0)) {
      throw InvalidConfig("explicit epsilon must be nonnegative");
    }
    if (variant == Variant::Smoothed && eps_policy == EpsilonPolicy::Explicit &&
        eps == 0) {
      throw InvalidConfig("smoothed variant requires a positive epsilon");
    }
  }

  /// Smoothing used for a problem with q constraints. The semismooth
  /// variant runs unsmoothed unless ε is given explicitly.
  Scalar epsilon_for(Eigen::Index q) const {
    using std::sqrt;
    if (eps_policy == EpsilonPolicy::Explicit) return eps;
    if (variant == Variant::Semismooth) return Scalar(0);
    return tol / (Scalar(2) * sqrt(static_cast<Scalar>(q)));
  }
};

/**
 * Newton matrix and right-hand side
 *
 *   [ H    Aᵀ ] [Δz]   [r_s]
 *   [ −CA  D  ] [Δν] = [r_c]
 *
 * with C = diag(γ), D = diag(μ). H and A are borrowed from the problem.
 */
template <typename Scalar>
struct NewtonSystem {
  const QpProblem<Scalar>* problem = nullptr;
  FbCoefficients<Scalar> coeffs;
  Vector<Scalar> r_s;
  Vector<Scalar> r_c;

  Eigen::Index n() const { return problem->n(); }
  Eigen::Index q() const { return problem->q(); }

  Vector<Scalar> rhs() const {
    Vector<Scalar> r(n() + q());
    r << r_s, r_c;
    return r;
  }

  Matrix<Scalar> dense() const {
    const auto& H = problem->H();
    const auto& A = problem->A();
    Matrix<Scalar> K(n() + q(), n() + q());
    K.topLeftCorner(n(), n()) = H;
    K.topRightCorner(n(), q()) = A.transpose();
    K.bottomLeftCorner(q(), n()) = -(coeffs.gamma.asDiagonal() * A);
    K.bottomRightCorner(q(), q()) = coeffs.mu.asDiagonal();
    return K;
  }

  /// K·d without forming K.
  Vector<Scalar> apply(const Vector<Scalar>& d) const {
    const auto& H = problem->H();
    const auto& A = problem->A();
    const auto dz = d.head(n());
    const auto dv = d.tail(q());
    Vector<Scalar> out(n() + q());
    out.head(n()) = H * dz + A.transpose() * dv;
    out.tail(q()) =
        coeffs.mu.cwiseProduct(dv) - coeffs.gamma.cwiseProduct(A * dz);
    return out;
  }

  /// Kᵀ·d without forming K.
  Vector<Scalar> apply_transpose(const Vector<Scalar>& d) const {
    const auto& H = problem->H();
    const auto& A = problem->A();
    const auto dz = d.head(n());
    const auto dv = d.tail(q());
    Vector<Scalar> out(n() + q());
    out.head(n()) = H * dz - A.transpose() * coeffs.gamma.cwiseProduct(dv);
    out.tail(q()) = A * dz + coeffs.mu.cwiseProduct(dv);
    return out;
  }
};

template <typename Scalar>
NewtonSystem<Scalar> assemble_system(const QpProblem<Scalar>& p,
                                     const PrimalDualPoint<Scalar>& x,
                                     Scalar eps, Scalar delta,
                                     Variant variant) {
  auto split = residual_split(p, x, eps);
  NewtonSystem<Scalar> sys;
  sys.problem = &p;
  sys.coeffs = fb_coefficients(split.constraint_slack, x.v, eps, delta, variant);
  sys.r_s = std::move(split.stationarity);
  sys.r_c = std::move(split.complementarity);
  return sys;
}

template <typename Scalar>
struct StepSolution {
  Vector<Scalar> step;
  /// ‖K·Δx − rhs‖ / (1 + ‖rhs‖)
  Scalar residual{0};
  LinearSolveStatus status = LinearSolveStatus::Ok;

  bool ok() const { return status == LinearSolveStatus::Ok; }
};

namespace detail {

template <typename Scalar>
Scalar relative_residual(const NewtonSystem<Scalar>& sys,
                         const Vector<Scalar>& step,
                         const Vector<Scalar>& rhs) {
  return (sys.apply(step) - rhs).norm() / (Scalar(1) + rhs.norm());
}

}  // namespace detail

/// Dense LU with partial pivoting on the full (n+q)×(n+q) matrix.
template <typename Scalar>
StepSolution<Scalar> solve_full(const NewtonSystem<Scalar>& sys) {
  using std::abs;
  const Matrix<Scalar> K = sys.dense();
  const Vector<Scalar> rhs = sys.rhs();
  StepSolution<Scalar> out;

  Eigen::PartialPivLU<Matrix<Scalar>> lu(K);
  const Scalar scale = std::max(Scalar(1), K.cwiseAbs().maxCoeff());
  const Scalar min_pivot =
      lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > Scalar(1e-14) * scale)) {
    out.status = LinearSolveStatus::SingularSystem;
    return out;
  }
  out.step = lu.solve(rhs);
  if (!out.step.allFinite()) {
    out.status = LinearSolveStatus::SingularSystem;
    return out;
  }
  out.residual = detail::relative_residual(sys, out.step, rhs);
  return out;
}

/**
 * Block elimination of Δν:
 *
 *   (H + AᵀCD⁻¹A) Δz = r_s − AᵀD⁻¹r_c
 *   D Δν = r_c + CAΔz
 *
 * The n×n Schur matrix is SPD under the kernel condition whenever γ, μ > 0,
 * and is factored by Cholesky. One step of iterative refinement against the
 * full system follows, since the Schur matrix grows ill-conditioned as μ_i → 0
 * on strongly active rows.
 */
template <typename Scalar>
StepSolution<Scalar> solve_condensed(const NewtonSystem<Scalar>& sys) {
  StepSolution<Scalar> out;
  const auto& H = sys.problem->H();
  const auto& A = sys.problem->A();
  const auto& gamma = sys.coeffs.gamma;
  const auto& mu = sys.coeffs.mu;
  const auto n = sys.n();
  const auto q = sys.q();

  if (!(mu.minCoeff() > 0) || !(gamma.minCoeff() >= 0)) {
    out.status = LinearSolveStatus::CholeskyFailure;
    return out;
  }

  const Vector<Scalar> weight = gamma.cwiseQuotient(mu);
  Matrix<Scalar> schur = H;
  schur.noalias() += A.transpose() * weight.asDiagonal() * A;
  Eigen::LLT<Matrix<Scalar>> llt(schur);
  if (llt.info() != Eigen::Success) {
    out.status = LinearSolveStatus::CholeskyFailure;
    return out;
  }

  auto reduce = [&](const Vector<Scalar>& rs, const Vector<Scalar>& rc) {
    Vector<Scalar> d(n + q);
    d.head(n) = llt.solve(rs - A.transpose() * rc.cwiseQuotient(mu));
    d.tail(q) = (rc + gamma.cwiseProduct(A * d.head(n))).cwiseQuotient(mu);
    return d;
  };

  const Vector<Scalar> rhs = sys.rhs();
  out.step = reduce(sys.r_s, sys.r_c);
  const Vector<Scalar> res = rhs - sys.apply(out.step);
  out.step += reduce(res.head(n), res.tail(q));

  if (!out.step.allFinite()) {
    out.status = LinearSolveStatus::CholeskyFailure;
    return out;
  }
  out.residual = detail::relative_residual(sys, out.step, rhs);
  return out;
}

template <typename Scalar>
StepSolution<Scalar> solve_newton_system(const NewtonSystem<Scalar>& sys,
                                         SolvePath path) {
  switch (path) {
    case SolvePath::FullLu:
      return solve_full(sys);
    case SolvePath::CondensedCholesky:
      return solve_condensed(sys);
    case SolvePath::Auto: {
      auto step = solve_condensed(sys);
      if (step.ok()) return step;
      return solve_full(sys);
    }
  }
  return solve_full(sys);
}

/// θ_ε(x) = ½‖F_ε(x)‖²
template <typename Scalar>
Scalar merit(const QpProblem<Scalar>& p, const PrimalDualPoint<Scalar>& x,
             Scalar eps) {
  return Scalar(0.5) * residual_map(p, x, eps).squaredNorm();
}

/// ∇θ_ε(x) = Vᵀ F_ε(x), V the unregularized (δ = 0) Newton matrix.
template <typename Scalar>
Vector<Scalar> merit_gradient(const QpProblem<Scalar>& p,
                              const PrimalDualPoint<Scalar>& x, Scalar eps,
                              Variant variant) {
  const auto sys = assemble_system(p, x, eps, Scalar(0), variant);
  return sys.apply_transpose(-sys.rhs());
}

template <typename Scalar>
struct LinesearchStep {
  Scalar t{1};
  int backtracks = 0;
  Scalar merit{0};  // θ_ε at the accepted point
};

/**
 * Pure backtracking over t ∈ {1, β, β², ...}: returns the first t with
 * θ_ε(x + tΔx) < (1 − 2tσ)·θ_ε(x), or nullopt once more than max_backtracks
 * reductions would be needed.
 */
template <typename Scalar>
std::optional<LinesearchStep<Scalar>> linesearch(
    const QpProblem<Scalar>& p, const PrimalDualPoint<Scalar>& x,
    const Vector<Scalar>& dx, Scalar eps, Scalar sigma, Scalar beta,
    int max_backtracks, std::optional<Scalar> merit_at_x = std::nullopt) {
  const Scalar theta = merit_at_x ? *merit_at_x : merit(p, x, eps);
  if (!(theta > 0)) return std::nullopt;

  const auto n = p.n();
  PrimalDualPoint<Scalar> trial;
  Scalar t(1);
  for (int j = 0; j <= max_backtracks; ++j) {
    trial.z = x.z + t * dx.head(n);
    trial.v = x.v + t * dx.tail(p.q());
    const Scalar trial_merit = merit(p, trial, eps);
    if (trial_merit < (Scalar(1) - Scalar(2) * t * sigma) * theta) {
      return LinesearchStep<Scalar>{t, j, trial_merit};
    }
    t *= beta;
  }
  return std::nullopt;
}

/// Backtracking along −∇θ_ε with the standard Armijo test
/// θ(x + t d) ≤ θ(x) − σ t ‖∇θ‖².
template <typename Scalar>
std::optional<LinesearchStep<Scalar>> gradient_linesearch(
    const QpProblem<Scalar>& p, const PrimalDualPoint<Scalar>& x,
    const Vector<Scalar>& grad, Scalar eps, Scalar sigma, Scalar beta,
    int max_backtracks, Scalar theta) {
  const Scalar slope = grad.squaredNorm();
  if (!(slope > 0)) return std::nullopt;
  const auto n = p.n();
  PrimalDualPoint<Scalar> trial;
  Scalar t(1);
  for (int j = 0; j <= max_backtracks; ++j) {
    trial.z = x.z - t * grad.head(n);
    trial.v = x.v - t * grad.tail(p.q());
    const Scalar trial_merit = merit(p, trial, eps);
    if (trial_merit <= theta - sigma * t * slope && trial_merit < theta) {
      return LinesearchStep<Scalar>{t, j, trial_merit};
    }
    t *= beta;
  }
  return std::nullopt;
}

/// State of one iterate x^k and the step taken from it.
template <typename Scalar>
struct IterationRecord {
  int k = 0;
  Scalar norm_Feps{0};
  Scalar norm_F0{0};
  Scalar norm_Fnr{0};
  Scalar t{0};  // 0 on the terminal record
  Scalar delta{0};
  Scalar eps{0};
  int backtracks = 0;
  Scalar linear_solve_residual{0};
  StepKind step = StepKind::None;
};

template <typename Scalar>
struct SolverResult {
  PrimalDualPoint<Scalar> x;
  SolveStatus status = SolveStatus::MaxIters;
  int iterations = 0;  // accepted steps
  Scalar final_norm_F0{0};
  Scalar final_norm_Feps{0};
  Scalar final_norm_Fnr{0};
  std::vector<IterationRecord<Scalar>> trace;
};

namespace detail {

template <typename Scalar>
PrimalDualPoint<Scalar> advance(const PrimalDualPoint<Scalar>& x,
                                const Vector<Scalar>& dx, Scalar t) {
  const auto n = x.z.size();
  return {x.z + t * dx.head(n), x.v + t * dx.tail(x.v.size())};
}

}  // namespace detail

/**
 * Regularized and smoothed Fischer-Burmeister Newton method.
 *
 * Each iteration first clips δ to ‖F_ε(x)‖, then tests termination, then
 * takes a backtracked Newton step. A warm-started exact solution therefore
 * exits with zero Newton solves. The trace holds iterations + 1 records: one
 * per iterate including the final one.
 *
 * If the Armijo search fails, δ is divided by 10 and the step recomputed, up
 * to three times; after that one backtracked step along −∇θ_ε is tried before
 * giving up with LinesearchFailure.
 */
template <typename Scalar>
SolverResult<Scalar> fbrs_solve(const QpProblem<Scalar>& p,
                                const PrimalDualPoint<Scalar>& x0,
                                const SolverConfig<Scalar>& cfg = {}) {
  cfg.validate();
  require_dimensions(p, x0);
  if (!x0.z.allFinite() || !x0.v.allFinite()) {
    throw InvalidProblem("initial point contains non-finite entries");
  }

  SolverResult<Scalar> result;
  result.x = x0;
  if (cfg.check_problem && !validate_problem(p).pass) {
    result.status = SolveStatus::InvalidProblem;
    return result;
  }

  constexpr int kDeltaReductions = 3;
  const Scalar eps = cfg.epsilon_for(p.q());
  Scalar delta = cfg.delta0;
  PrimalDualPoint<Scalar> x = x0;

  for (int k = 0;; ++k) {
    const Vector<Scalar> F = residual_map(p, x, eps);
    IterationRecord<Scalar> rec;
    rec.k = k;
    rec.eps = eps;
    rec.norm_Feps = F.norm();
    rec.norm_F0 = eps == 0 ? rec.norm_Feps : residual_map(p, x, Scalar(0)).norm();
    rec.norm_Fnr = natural_residual(p, x).norm();
    if (cfg.update_delta) delta = std::min(delta, rec.norm_Feps);
    rec.delta = delta;

    const Scalar measure =
        cfg.criterion == Criterion::F0 ? rec.norm_F0 : rec.norm_Fnr;
    if (measure <= cfg.tol || k == cfg.max_iters) {
      result.status =
          measure <= cfg.tol ? SolveStatus::Solved : SolveStatus::MaxIters;
      result.trace.push_back(rec);
      break;
    }

    const Scalar theta = Scalar(0.5) * rec.norm_Feps * rec.norm_Feps;
    std::optional<LinesearchStep<Scalar>> accepted;
    Vector<Scalar> dx;
    for (int attempt = 0; attempt <= kDeltaReductions && !accepted; ++attempt) {
      if (attempt > 0) delta /= Scalar(10);
      const auto sys = assemble_system(p, x, eps, delta, cfg.variant);
      auto step = solve_newton_system(sys, cfg.solve_path);
      if (!step.ok()) continue;
      accepted = linesearch(p, x, step.step, eps, cfg.sigma, cfg.beta,
                            cfg.max_backtracks, std::optional<Scalar>(theta));
      if (accepted) {
        dx = std::move(step.step);
        rec.linear_solve_residual = step.residual;
        rec.step = StepKind::Newton;
      }
    }
    if (!accepted) {
      const Vector<Scalar> grad = merit_gradient(p, x, eps, cfg.variant);
      accepted = gradient_linesearch(p, x, grad, eps, cfg.sigma, cfg.beta,
                                     cfg.max_backtracks, theta);
      if (accepted) {
        dx = -grad;
        rec.step = StepKind::GradientDescent;
      }
    }
    rec.delta = delta;
    if (!accepted) {
      result.status = SolveStatus::LinesearchFailure;
      result.trace.push_back(rec);
      break;
    }

    rec.t = accepted->t;
    rec.backtracks = accepted->backtracks;
    result.trace.push_back(rec);
    x = detail::advance(x, dx, accepted->t);
    ++result.iterations;
  }

  const auto& last = result.trace.back();
  result.x = std::move(x);
  result.final_norm_F0 = last.norm_F0;
  result.final_norm_Feps = last.norm_Feps;
  result.final_norm_Fnr = last.norm_Fnr;
  return result;
}

}  // namespace fbrs
