#include "fbrs/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "fbrs/mpc.hpp"
#include "fbrs/newton.hpp"
#include "fbrs/oracle.hpp"
#include "fbrs/qp_file.hpp"

namespace fbrs::cli {

namespace {

struct SolveOptions {
  std::string input;
  double tol = 1e-8;
  int max_iters = 30;
  double sigma = 1e-4;
  double beta = 0.7;
  double delta0 = 1e-8;
  std::optional<double> eps;
  bool fixed_delta = false;
  Variant variant = Variant::Smoothed;
  SolvePath path = SolvePath::Auto;
  Criterion criterion = Criterion::F0;
  std::string warmstart;
  std::string trace;
  std::string output;
};

struct MpcOptions {
  std::string example = "double-integrator";
  int horizon = 10;
  int steps = 50;
  mpc::StartMode mode = mpc::StartMode::Warm;
  double tol = 1e-6;
  int max_iters = 30;
  bool shift = false;
  std::string stats;
};

std::string format_vector(const Eigen::VectorXd& v) {
  std::string out;
  char buf[32];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.17g", i ? " " : "", v(i));
    out += buf;
  }
  return out;
}

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream file(path);
  if (!file) throw Error("cannot write '" + path + "'");
  writer(file);
}

int do_solve(const SolveOptions& o, std::ostream& out) {
  const QpFile file = read_qp_file(o.input);
  const auto& p = file.problem;

  auto x0 = file.x0.value_or(PrimalDualPoint<double>::Zero(p.n(), p.q()));
  if (!o.warmstart.empty()) {
    const QpFile warm = read_qp_file(o.warmstart);
    if (!warm.x0) throw Error("warmstart file '" + o.warmstart + "' has no x0");
    if (!dimensions_match(p, *warm.x0)) {
      throw Error("warmstart dimensions do not match the problem");
    }
    x0 = *warm.x0;
  }

  SolverConfig<double> cfg;
  cfg.tol = o.tol;
  cfg.max_iters = o.max_iters;
  cfg.sigma = o.sigma;
  cfg.beta = o.beta;
  cfg.delta0 = o.delta0;
  cfg.variant = o.variant;
  cfg.solve_path = o.path;
  cfg.criterion = o.criterion;
  cfg.update_delta = !o.fixed_delta;
  if (o.eps) {
    cfg.eps_policy = EpsilonPolicy::Explicit;
    cfg.eps = *o.eps;
  }

  const auto result = fbrs_solve(p, x0, cfg);

  out << "status " << to_string(result.status) << '\n'
      << "iterations " << result.iterations << '\n';
  char buf[160];
  std::snprintf(buf, sizeof buf, "norm_F0 %.17g\nnorm_Feps %.17g\nnorm_Fnr %.17g\n",
                result.final_norm_F0, result.final_norm_Feps,
                result.final_norm_Fnr);
  out << buf;
  out << "z " << format_vector(result.x.z) << '\n'
      << "v " << format_vector(result.x.v) << '\n';

  if (!o.trace.empty()) {
    write_file(o.trace, [&](std::ostream& f) { write_trace_csv(f, result.trace); });
  }
  if (!o.output.empty()) {
    write_file(o.output, [&](std::ostream& f) { f << serialize_qp(p, result.x); });
  }
  return result.status == SolveStatus::Solved ? kSuccess : kSolverFailure;
}

int do_validate(const std::string& input, std::ostream& out) {
  const QpFile file = read_qp_file(input);
  const auto report = validate_problem(file.problem);
  char buf[128];
  std::snprintf(buf, sizeof buf, "n %ld\nq %ld\n",
                static_cast<long>(file.problem.n()),
                static_cast<long>(file.problem.q()));
  out << buf;
  std::snprintf(buf, sizeof buf, "input asymmetry %.3e%s\n", report.input_asymmetry,
                report.asymmetry_warning ? " (warning: H was symmetrized)" : "");
  out << buf;
  std::snprintf(buf, sizeof buf, "symmetry: %s\n", report.symmetric_ok ? "ok" : "FAIL");
  out << buf;
  std::snprintf(buf, sizeof buf,
                "A3 ker H ∩ ker A = {0}: %s (sigma_min %.3e, sigma_max %.3e)\n",
                report.kernel_ok ? "ok" : "FAIL", report.sigma_min,
                report.sigma_max);
  out << buf;
  out << (report.pass ? "valid\n" : "invalid\n");
  return report.pass ? kSuccess : kSolverFailure;
}

int do_oracle(const std::string& input, std::ostream& out) {
  const QpFile file = read_qp_file(input);
  const auto result = solve_by_enumeration(file.problem);
  out << "status " << to_string(result.status) << '\n';
  if (result.status != EnumerationStatus::Solved) return kSolverFailure;
  const auto kkt = verify_kkt(file.problem, result.x, 1e-8);
  out << "z " << format_vector(result.x.z) << '\n'
      << "v " << format_vector(result.x.v) << '\n'
      << "kkt " << (kkt.pass ? "pass" : "fail") << '\n';
  return kSuccess;
}

int do_mpc(const MpcOptions& o, std::ostream& out) {
  const auto spec = mpc::bundled_example(o.example, o.horizon);
  SolverConfig<double> cfg;
  cfg.tol = o.tol;
  cfg.max_iters = o.max_iters;
  mpc::SequenceOptions seq;
  seq.shift_warmstart = o.shift;
  const auto run = mpc::run_sequence(spec, o.steps, o.mode, cfg, seq);
  const auto& s = run.stats;

  char buf[256];
  std::snprintf(buf, sizeof buf,
                "example %s\nmode %s\nqps %zu\nall_solved %s\n"
                "mean_iterations %.6g\nmax_iterations %d\n"
                "mean_time_s %.6g\nmax_time_s %.6g\nfinal_state_norm %.6g\n",
                o.example.c_str(), o.mode == mpc::StartMode::Warm ? "warm" : "cold",
                s.records.size(), s.all_solved() ? "yes" : "no", s.mean_iterations,
                s.max_iterations, s.mean_seconds, s.max_seconds,
                run.trajectory.states.back().norm());
  out << buf;
  if (!o.stats.empty()) {
    write_file(o.stats, [&](std::ostream& f) { mpc::write_stats_csv(f, s); });
  }
  return s.all_solved() ? kSuccess : kSolverFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Dense convex QP solver (regularized, smoothed Fischer-Burmeister Newton)"};
  app.require_subcommand(1);

  SolveOptions solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a QP given in FBQP format");
  solve_cmd->add_option("--input", solve.input, "FBQP problem file")->required();
  solve_cmd->add_option("--tol", solve.tol, "Termination tolerance")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--max-iters", solve.max_iters, "Iteration limit")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--sigma", solve.sigma, "Armijo parameter in (0, 0.5)");
  solve_cmd->add_option("--beta", solve.beta, "Backtracking factor in (0, 1)");
  solve_cmd->add_option("--delta0", solve.delta0, "Initial regularization");
  solve_cmd->add_option("--eps", solve.eps,
                        "Fixed smoothing (default tol / (2 sqrt(q)))");
  solve_cmd->add_flag("--fixed-delta", solve.fixed_delta,
                      "Keep delta = delta0 for every iteration");
  solve_cmd->add_option("--variant", solve.variant, "smoothed|semismooth")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Variant>{{"smoothed", Variant::Smoothed},
                                         {"semismooth", Variant::Semismooth}}));
  solve_cmd->add_option("--path", solve.path, "auto|full|condensed")
      ->transform(CLI::CheckedTransformer(std::map<std::string, SolvePath>{
          {"auto", SolvePath::Auto},
          {"full", SolvePath::FullLu},
          {"condensed", SolvePath::CondensedCholesky}}));
  solve_cmd->add_option("--criterion", solve.criterion, "f0|fnr")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Criterion>{
          {"f0", Criterion::F0}, {"fnr", Criterion::NaturalResidual}}));
  solve_cmd->add_option("--warmstart", solve.warmstart,
                        "FBQP file whose x0 is used as the initial point");
  solve_cmd->add_option("--trace", solve.trace, "Write the iteration trace CSV");
  solve_cmd->add_option("--output", solve.output,
                        "Write the problem with x0 set to the solution");

  MpcOptions mpc_opts;
  auto* mpc_cmd = app.add_subcommand("mpc", "Closed-loop MPC sequence on a bundled plant");
  mpc_cmd->add_option("--example", mpc_opts.example, "double-integrator|mass-spring")
      ->check(CLI::IsMember({"double-integrator", "mass-spring"}));
  mpc_cmd->add_option("--horizon", mpc_opts.horizon, "Prediction horizon")
      ->check(CLI::PositiveNumber);
  mpc_cmd->add_option("--steps", mpc_opts.steps, "Closed-loop steps")
      ->check(CLI::PositiveNumber);
  mpc_cmd->add_option("--mode", mpc_opts.mode, "warm|cold")
      ->transform(CLI::CheckedTransformer(std::map<std::string, mpc::StartMode>{
          {"warm", mpc::StartMode::Warm}, {"cold", mpc::StartMode::Cold}}));
  mpc_cmd->add_option("--tol", mpc_opts.tol, "Solver tolerance")
      ->check(CLI::PositiveNumber);
  mpc_cmd->add_option("--max-iters", mpc_opts.max_iters, "Iteration limit per QP")
      ->check(CLI::PositiveNumber);
  mpc_cmd->add_flag("--shift", mpc_opts.shift,
                    "Shift the previous solution one stage before reuse");
  mpc_cmd->add_option("--stats", mpc_opts.stats, "Write per-QP statistics CSV");

  std::string validate_input;
  auto* validate_cmd = app.add_subcommand("validate", "Check problem assumptions");
  validate_cmd->add_option("--input", validate_input, "FBQP problem file")->required();

  std::string oracle_input;
  auto* oracle_cmd =
      app.add_subcommand("oracle", "Exact solution by active-set enumeration");
  oracle_cmd->add_option("--input", oracle_input, "FBQP problem file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*solve_cmd) return do_solve(solve, out);
    if (*mpc_cmd) return do_mpc(mpc_opts, out);
    if (*validate_cmd) return do_validate(validate_input, out);
    if (*oracle_cmd) return do_oracle(oracle_input, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace fbrs::cli
