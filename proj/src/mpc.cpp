#include "fbrs/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

namespace fbrs::mpc {

void LtiMpcSpec::validate() const {
  const auto n = nx();
  const auto m = nu();
  if (n == 0 || Ad.cols() != n) throw InvalidSpec("Ad must be square and nonempty");
  if (Bd.rows() != n || m == 0) throw InvalidSpec("Bd must be nx × nu with nu > 0");
  if (Q.rows() != n || Q.cols() != n) throw InvalidSpec("Q must be nx × nx");
  if (R.rows() != m || R.cols() != m) throw InvalidSpec("R must be nu × nu");
  if (horizon < 1) throw InvalidSpec("horizon must be positive");
  if (u_lo.size() != m || u_hi.size() != m) throw InvalidSpec("input bounds must have nu entries");
  if (x_init.size() != n) throw InvalidSpec("x_init must have nx entries");
  if ((x_lo && x_lo->size() != n) || (x_hi && x_hi->size() != n)) {
    throw InvalidSpec("state bounds must have nx entries");
  }
  if (!Ad.allFinite() || !Bd.allFinite() || !Q.allFinite() || !R.allFinite() ||
      !x_init.allFinite()) {
    throw InvalidSpec("model data contains non-finite entries");
  }
  if (!(u_lo.array() < u_hi.array()).all()) throw InvalidSpec("require u_lo < u_hi");
  if (x_lo && x_hi && !(x_lo->array() < x_hi->array()).all()) {
    throw InvalidSpec("require x_lo < x_hi");
  }

  const MatrixXd Rs = (R + R.transpose()) / 2;
  Eigen::SelfAdjointEigenSolver<MatrixXd> r_eig(Rs, Eigen::EigenvaluesOnly);
  if (!(r_eig.eigenvalues().minCoeff() > 0)) throw InvalidSpec("R must be positive definite");
  const MatrixXd Qs = (Q + Q.transpose()) / 2;
  Eigen::SelfAdjointEigenSolver<MatrixXd> q_eig(Qs, Eigen::EigenvaluesOnly);
  if (q_eig.eigenvalues().minCoeff() < -1e-12 * (1 + Qs.norm())) {
    throw InvalidSpec("Q must be positive semidefinite");
  }
}

PredictionMatrices prediction_matrices(const LtiMpcSpec& spec) {
  const auto n = spec.nx();
  const auto m = spec.nu();
  const int N = spec.horizon;
  PredictionMatrices pm;
  pm.Phi.resize(N * n, n);
  pm.G = MatrixXd::Zero(N * n, N * m);

  // powers[k] = Ad^k
  std::vector<MatrixXd> powers(N + 1);
  powers[0] = MatrixXd::Identity(n, n);
  for (int k = 1; k <= N; ++k) powers[k] = spec.Ad * powers[k - 1];

  for (int k = 0; k < N; ++k) {
    pm.Phi.middleRows(k * n, n) = powers[k + 1];
    for (int j = 0; j <= k; ++j) {
      pm.G.block(k * n, j * m, n, m) = powers[k - j] * spec.Bd;
    }
  }
  return pm;
}

namespace {

std::vector<Eigen::Index> finite_indices(const std::optional<VectorXd>& bound) {
  std::vector<Eigen::Index> idx;
  if (!bound) return idx;
  for (Eigen::Index i = 0; i < bound->size(); ++i) {
    if (std::isfinite((*bound)(i))) idx.push_back(i);
  }
  return idx;
}

}  // namespace

Eigen::Index rows_per_stage(const LtiMpcSpec& spec) {
  return 2 * spec.nu() +
         static_cast<Eigen::Index>(finite_indices(spec.x_hi).size() +
                                   finite_indices(spec.x_lo).size());
}

QpProblem<double> condense(const LtiMpcSpec& spec, const VectorXd& x_init) {
  spec.validate();
  if (x_init.size() != spec.nx() || !x_init.allFinite()) {
    throw InvalidSpec("initial state must be a finite nx-vector");
  }
  const auto n = spec.nx();
  const auto m = spec.nu();
  const int N = spec.horizon;
  const auto pm = prediction_matrices(spec);

  MatrixXd Qbar = MatrixXd::Zero(N * n, N * n);
  MatrixXd Rbar = MatrixXd::Zero(N * m, N * m);
  for (int k = 0; k < N; ++k) {
    Qbar.block(k * n, k * n, n, n) = spec.Q;
    Rbar.block(k * m, k * m, m, m) = spec.R;
  }
  const VectorXd free_response = pm.Phi * x_init;
  MatrixXd H = pm.G.transpose() * Qbar * pm.G + Rbar;
  VectorXd f = pm.G.transpose() * Qbar * free_response;

  const auto hi_idx = finite_indices(spec.x_hi);
  const auto lo_idx = finite_indices(spec.x_lo);
  const auto per_stage = rows_per_stage(spec);
  MatrixXd A = MatrixXd::Zero(N * per_stage, N * m);
  VectorXd b(N * per_stage);

  for (int k = 0; k < N; ++k) {
    Eigen::Index r = k * per_stage;
    for (Eigen::Index i = 0; i < m; ++i, ++r) {
      A(r, k * m + i) = 1;
      b(r) = spec.u_hi(i);
    }
    for (Eigen::Index i = 0; i < m; ++i, ++r) {
      A(r, k * m + i) = -1;
      b(r) = -spec.u_lo(i);
    }
    for (auto i : hi_idx) {
      A.row(r) = pm.G.row(k * n + i);
      b(r++) = (*spec.x_hi)(i) - free_response(k * n + i);
    }
    for (auto i : lo_idx) {
      A.row(r) = -pm.G.row(k * n + i);
      b(r++) = free_response(k * n + i) - (*spec.x_lo)(i);
    }
  }
  return QpProblem<double>(std::move(H), std::move(f), std::move(A), std::move(b));
}

bool SequenceStats::all_solved() const {
  return std::all_of(records.begin(), records.end(), [](const QpRecord& r) {
    return r.status == SolveStatus::Solved;
  });
}

SequenceStats summarize(std::vector<QpRecord> records) {
  SequenceStats s;
  s.records = std::move(records);
  if (s.records.empty()) return s;
  double iters = 0;
  double seconds = 0;
  for (const auto& r : s.records) {
    iters += r.iterations;
    seconds += r.solve_seconds;
    s.max_iterations = std::max(s.max_iterations, r.iterations);
    s.max_seconds = std::max(s.max_seconds, r.solve_seconds);
  }
  s.mean_iterations = iters / static_cast<double>(s.records.size());
  s.mean_seconds = seconds / static_cast<double>(s.records.size());
  return s;
}

namespace {

/// Drops the first stage and repeats the last one, for primal and dual.
PrimalDualPoint<double> shift_one_stage(const PrimalDualPoint<double>& x,
                                        Eigen::Index nu, Eigen::Index rows) {
  PrimalDualPoint<double> s = x;
  const auto nz = x.z.size();
  const auto nv = x.v.size();
  s.z.head(nz - nu) = x.z.tail(nz - nu);
  s.v.head(nv - rows) = x.v.tail(nv - rows);
  return s;
}

}  // namespace

SequenceRun run_sequence(const LtiMpcSpec& spec, int steps, StartMode mode,
                         const SolverConfig<double>& cfg,
                         const SequenceOptions& options) {
  if (steps < 1) throw InvalidSpec("steps must be positive");
  spec.validate();

  SequenceRun run;
  std::vector<QpRecord> records;
  VectorXd state = spec.x_init;
  run.trajectory.states.push_back(state);
  std::optional<PrimalDualPoint<double>> previous;

  for (int k = 0; k < steps; ++k) {
    try {
      const auto qp = condense(spec, state);
      PrimalDualPoint<double> x0 = PrimalDualPoint<double>::Zero(qp.n(), qp.q());
      if (mode == StartMode::Warm && previous) {
        x0 = options.shift_warmstart
                 ? shift_one_stage(*previous, spec.nu(), rows_per_stage(spec))
                 : *previous;
      }

      const auto start = std::chrono::steady_clock::now();
      auto result = fbrs_solve(qp, x0, cfg);
      const auto stop = std::chrono::steady_clock::now();

      QpRecord rec;
      rec.step = k;
      rec.iterations = result.iterations;
      rec.status = result.status;
      rec.norm_F0 = result.final_norm_F0;
      rec.norm_Fnr = result.final_norm_Fnr;
      rec.solve_seconds = std::chrono::duration<double>(stop - start).count();
      if (options.record_traces) rec.trace = std::move(result.trace);
      records.push_back(rec);

      const VectorXd u = result.x.z.head(spec.nu());
      state = spec.Ad * state + spec.Bd * u;
      run.trajectory.inputs.push_back(u);
      run.trajectory.states.push_back(state);
      run.trajectory.solutions.push_back(result.x.z);
      previous = std::move(result.x);
    } catch (const Error& e) {
      throw Error("step " + std::to_string(k) + ": " + e.what());
    }
  }
  run.stats = summarize(std::move(records));
  return run;
}

void write_stats_csv(std::ostream& out, const SequenceStats& stats) {
  out << "step,iterations,status,norm_F0,norm_Fnr,solve_time_s\n";
  char buf[160];
  for (const auto& r : stats.records) {
    std::snprintf(buf, sizeof buf, "%d,%d,%s,%.17g,%.17g,%.17g\n", r.step,
                  r.iterations, std::string(to_string(r.status)).c_str(),
                  r.norm_F0, r.norm_Fnr, r.solve_seconds);
    out << buf;
  }
}

LtiMpcSpec double_integrator(int horizon) {
  LtiMpcSpec s;
  s.Ad.resize(2, 2);
  s.Ad << 1, 0.1,
          0, 1;
  s.Bd.resize(2, 1);
  s.Bd << 0.005, 0.1;
  s.Q = Eigen::Vector2d(10, 1).asDiagonal();
  s.R = MatrixXd::Constant(1, 1, 0.1);
  s.horizon = horizon;
  s.u_lo = VectorXd::Constant(1, -1.0);
  s.u_hi = VectorXd::Constant(1, 1.0);
  // velocity limit only; position is unbounded
  s.x_lo = Eigen::Vector2d(-std::numeric_limits<double>::infinity(), -0.5);
  s.x_hi = Eigen::Vector2d(std::numeric_limits<double>::infinity(), 0.5);
  s.x_init = Eigen::Vector2d(1.5, 0);
  return s;
}

LtiMpcSpec mass_spring_chain(int horizon) {
  constexpr double kSpring = 1.0;
  constexpr double kDamping = 0.1;
  constexpr double kSample = 0.1;

  // state (p1, p2, p3, v1, v2, v3); wall – m1 – m2 – m3
  MatrixXd K(3, 3);
  K << 2 * kSpring, -kSpring, 0,
       -kSpring, 2 * kSpring, -kSpring,
       0, -kSpring, kSpring;
  MatrixXd Ac = MatrixXd::Zero(6, 6);
  Ac.topRightCorner(3, 3) = MatrixXd::Identity(3, 3);
  Ac.bottomLeftCorner(3, 3) = -K;
  Ac.bottomRightCorner(3, 3) = -kDamping / kSpring * K;
  MatrixXd Bc = MatrixXd::Zero(6, 2);
  Bc(3, 0) = 1;
  Bc(5, 1) = 1;

  // exp([Ac Bc; 0 0]·Ts) = [Ad Bd; 0 I]
  MatrixXd aug = MatrixXd::Zero(8, 8);
  aug.topLeftCorner(6, 6) = Ac * kSample;
  aug.topRightCorner(6, 2) = Bc * kSample;
  const MatrixXd E = aug.exp();

  LtiMpcSpec s;
  s.Ad = E.topLeftCorner(6, 6);
  s.Bd = E.topRightCorner(6, 2);
  s.Q = MatrixXd::Identity(6, 6);
  s.R = 0.01 * MatrixXd::Identity(2, 2);
  s.horizon = horizon;
  s.u_lo = VectorXd::Constant(2, -0.2);
  s.u_hi = VectorXd::Constant(2, 0.2);
  s.x_init = VectorXd::Zero(6);
  s.x_init.head(3) << 1.0, -1.0, 0.5;
  return s;
}

LtiMpcSpec bundled_example(std::string_view name, int horizon) {
  if (name == "double-integrator") return double_integrator(horizon);
  if (name == "mass-spring") return mass_spring_chain(horizon);
  throw InvalidSpec("unknown example '" + std::string(name) + "'");
}

}  // namespace fbrs::mpc
