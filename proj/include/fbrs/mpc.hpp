#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "fbrs/newton.hpp"
#include "fbrs/qp_core.hpp"

namespace fbrs::mpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/**
 * Linear time-invariant MPC problem
 *
 *   minimize    ½ Σ_{k=1..N} x_kᵀQx_k + ½ Σ_{k=0..N-1} u_kᵀRu_k
 *   subject to  x_{k+1} = Ad x_k + Bd u_k
 *               u_lo ≤ u_k ≤ u_hi
 *               x_lo ≤ x_{k+1} ≤ x_hi   (optional, infinite entries skipped)
 */
struct LtiMpcSpec {
  MatrixXd Ad;
  MatrixXd Bd;
  MatrixXd Q;
  MatrixXd R;
  int horizon = 1;
  VectorXd u_lo;
  VectorXd u_hi;
  std::optional<VectorXd> x_lo;
  std::optional<VectorXd> x_hi;
  VectorXd x_init;

  Eigen::Index nx() const { return Ad.rows(); }
  Eigen::Index nu() const { return Bd.cols(); }

  /// Throws InvalidSpec when dimensions, definiteness or bounds are off.
  void validate() const;
};

/// Stacked predictions X = Φ x₀ + G U over the horizon.
struct PredictionMatrices {
  MatrixXd Phi;  // (N·nx) × nx
  MatrixXd G;    // (N·nx) × (N·nu), block lower triangular
};

PredictionMatrices prediction_matrices(const LtiMpcSpec& spec);

/// Number of constraint rows contributed by each stage.
Eigen::Index rows_per_stage(const LtiMpcSpec& spec);

/**
 * Eliminates the dynamics and returns the inequality QP over the stacked
 * inputs U ∈ ℝ^{N·nu}. Rows are grouped by stage: input upper, input lower,
 * then the finite state upper and lower bounds of x_{k+1}.
 */
QpProblem<double> condense(const LtiMpcSpec& spec, const VectorXd& x_init);

enum class StartMode { Cold, Warm };

struct SequenceOptions {
  /// Shift the previous solution by one stage before reusing it.
  bool shift_warmstart = false;
  /// Keep each solver trace in its QpRecord.
  bool record_traces = false;
};

struct QpRecord {
  int step = 0;
  int iterations = 0;
  SolveStatus status = SolveStatus::MaxIters;
  double norm_F0 = 0;
  double norm_Fnr = 0;
  double solve_seconds = 0;
  std::vector<IterationRecord<double>> trace;  // empty unless requested
};

struct SequenceStats {
  std::vector<QpRecord> records;
  double mean_iterations = 0;
  int max_iterations = 0;
  double mean_seconds = 0;
  double max_seconds = 0;

  bool all_solved() const;
};

struct Trajectory {
  std::vector<VectorXd> states;  // x_0 … x_steps
  std::vector<VectorXd> inputs;  // applied u_0 … u_{steps-1}
  std::vector<VectorXd> solutions;  // full QP primal solution per step
};

struct SequenceRun {
  Trajectory trajectory;
  SequenceStats stats;
};

/**
 * Closed-loop simulation: condense at the current state, solve, apply the
 * first input, advance the plant. Warm mode starts QP k+1 from the primal-dual
 * solution of QP k; cold mode starts every QP from zero.
 */
SequenceRun run_sequence(const LtiMpcSpec& spec, int steps, StartMode mode,
                         const SolverConfig<double>& cfg,
                         const SequenceOptions& options = {});

SequenceStats summarize(std::vector<QpRecord> records);

/// `step,iterations,status,norm_F0,norm_Fnr,solve_time_s`
void write_stats_csv(std::ostream& out, const SequenceStats& stats);

/// Double integrator, Ts = 0.1, Q = diag(10, 1), R = 0.1, |u| ≤ 1,
/// |velocity| ≤ 0.5, starting at rest at position 1.5.
LtiMpcSpec double_integrator(int horizon = 10);

/// Three unit masses chained by springs and dampers to a wall, forces on the
/// first and last mass, exact zero-order-hold discretization at Ts = 0.1.
/// Q = I, R = 0.01·I, |u| ≤ 0.2, initial displacements (1, −1, 0.5).
LtiMpcSpec mass_spring_chain(int horizon = 10);

/// Looks up "double-integrator" or "mass-spring"; throws InvalidSpec otherwise.
LtiMpcSpec bundled_example(std::string_view name, int horizon);

}  // namespace fbrs::mpc
