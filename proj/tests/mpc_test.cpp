#include "fbrs/mpc.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "fbrs/oracle.hpp"
#include "test_problems.hpp"

namespace fbrs::mpc {
namespace {

using testing::mat;
using testing::vec;

LtiMpcSpec plain_double_integrator(int horizon) {
  LtiMpcSpec s;
  s.Ad = mat({{1, 0.1}, {0, 1}});
  s.Bd = mat({{0.005}, {0.1}});
  s.Q = Eigen::MatrixXd::Identity(2, 2);
  s.R = mat({{0.1}});
  s.horizon = horizon;
  s.u_lo = vec({-1});
  s.u_hi = vec({1});
  s.x_init = vec({1, 0});
  return s;
}

SolverConfig<double> mpc_config() {
  SolverConfig<double> cfg;
  cfg.tol = 1e-6;
  return cfg;
}

TEST(CondenseTest, DimensionBookkeeping) {
  const auto spec = plain_double_integrator(2);
  const auto qp = condense(spec, spec.x_init);
  EXPECT_EQ(qp.n(), 2);
  EXPECT_EQ(qp.q(), 4);
  EXPECT_EQ(rows_per_stage(spec), 2);
  EXPECT_TRUE(validate_problem(qp).pass);
}

TEST(CondenseTest, StateBoundsAddOnlyFiniteRows) {
  auto spec = double_integrator(3);
  EXPECT_EQ(rows_per_stage(spec), 4);  // u up/down, velocity up/down
  const auto qp = condense(spec, spec.x_init);
  EXPECT_EQ(qp.q(), 12);
  EXPECT_TRUE(validate_problem(qp).pass);
}

TEST(CondenseTest, InputFreePlantGivesZeroLinearTerm) {
  auto spec = plain_double_integrator(1);
  spec.Bd = mat({{0}, {0}});
  const auto qp = condense(spec, vec({3, -2}));
  EXPECT_EQ(qp.f(), vec({0}));
  const auto sol = solve_by_enumeration(qp);
  ASSERT_EQ(sol.status, EnumerationStatus::Solved);
  EXPECT_EQ(sol.x.z(0), 0.0);
}

TEST(CondenseTest, PredictionMatricesReproduceSimulation) {
  const auto spec = mass_spring_chain(4);
  const auto pm = prediction_matrices(spec);
  const Eigen::VectorXd U = Eigen::VectorXd::LinSpaced(8, -0.2, 0.2);
  Eigen::VectorXd x = spec.x_init;
  const Eigen::VectorXd X = pm.Phi * spec.x_init + pm.G * U;
  for (int k = 0; k < 4; ++k) {
    x = spec.Ad * x + spec.Bd * U.segment(2 * k, 2);
    EXPECT_LE((X.segment(6 * k, 6) - x).norm(), 1e-12);
  }
}

TEST(CondenseTest, MatchesEnumerationOracle) {
  const auto spec = plain_double_integrator(5);
  const auto qp = condense(spec, spec.x_init);
  ASSERT_EQ(qp.q(), 10);
  const auto oracle = solve_by_enumeration(qp);
  ASSERT_EQ(oracle.status, EnumerationStatus::Solved);
  const auto r = fbrs_solve(qp, PrimalDualPoint<double>::Zero(qp.n(), qp.q()));
  ASSERT_EQ(r.status, SolveStatus::Solved);
  EXPECT_LE((r.x.z - oracle.x.z).norm(), 1e-6 * (1 + oracle.x.z.norm()));
  EXPECT_LE((r.x.v - oracle.x.v).norm(), 1e-6 * (1 + oracle.x.v.norm()));
}

TEST(SpecTest, InvalidSpecsThrow) {
  auto bad = plain_double_integrator(3);
  bad.R = mat({{0}});
  EXPECT_THROW(bad.validate(), InvalidSpec);

  bad = plain_double_integrator(3);
  bad.u_lo = vec({1});
  EXPECT_THROW(bad.validate(), InvalidSpec);

  bad = plain_double_integrator(0);
  EXPECT_THROW(bad.validate(), InvalidSpec);

  bad = plain_double_integrator(3);
  bad.Bd = mat({{1, 2}});
  EXPECT_THROW(condense(bad, bad.x_init), InvalidSpec);

  EXPECT_THROW(bundled_example("asteroid", 10), InvalidSpec);
  EXPECT_THROW(run_sequence(plain_double_integrator(3), 0, StartMode::Cold, mpc_config()),
               InvalidSpec);
}

TEST(RunSequenceTest, DoubleIntegratorSettles) {
  const auto run =
      run_sequence(double_integrator(), 50, StartMode::Warm, mpc_config());
  EXPECT_TRUE(run.stats.all_solved());
  ASSERT_EQ(run.trajectory.states.size(), 51u);
  EXPECT_LE(run.trajectory.states.back().norm(), 1e-2);
  EXPECT_LT(run.trajectory.states.back().norm(), run.trajectory.states.front().norm());
}

TEST(RunSequenceTest, SingleStepWarmEqualsCold) {
  const auto warm =
      run_sequence(double_integrator(), 1, StartMode::Warm, mpc_config());
  const auto cold =
      run_sequence(double_integrator(), 1, StartMode::Cold, mpc_config());
  EXPECT_EQ(warm.stats.records[0].iterations, cold.stats.records[0].iterations);
  EXPECT_EQ(warm.trajectory.solutions[0], cold.trajectory.solutions[0]);
}

TEST(RunSequenceTest, AppliedInputIsHeadOfSolution) {
  const auto spec = mass_spring_chain();
  const auto run = run_sequence(spec, 20, StartMode::Warm, mpc_config());
  for (std::size_t k = 0; k < run.trajectory.inputs.size(); ++k) {
    EXPECT_EQ(run.trajectory.inputs[k], run.trajectory.solutions[k].head(spec.nu()));
    EXPECT_EQ(run.trajectory.states[k + 1],
              (spec.Ad * run.trajectory.states[k] + spec.Bd * run.trajectory.inputs[k])
                  .eval());
  }
}

TEST(RunSequenceTest, StatsAreConsistent) {
  const auto run =
      run_sequence(double_integrator(), 30, StartMode::Cold, mpc_config());
  const auto& s = run.stats;
  ASSERT_EQ(s.records.size(), 30u);
  double total = 0;
  int worst = 0;
  for (const auto& r : s.records) {
    total += r.iterations;
    worst = std::max(worst, r.iterations);
  }
  EXPECT_DOUBLE_EQ(s.mean_iterations, total / 30);
  EXPECT_EQ(s.max_iterations, worst);
  EXPECT_GE(s.max_seconds, s.mean_seconds);

  std::ostringstream csv;
  write_stats_csv(csv, s);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "step,iterations,status,norm_F0,norm_Fnr,solve_time_s");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 30);
}

class WarmstartDominance : public ::testing::TestWithParam<std::string> {};

TEST_P(WarmstartDominance, WarmUsesAtMostSixtyPercentOfColdIterations) {
  const auto spec = bundled_example(GetParam(), 10);
  const auto warm = run_sequence(spec, 50, StartMode::Warm, mpc_config());
  const auto cold = run_sequence(spec, 50, StartMode::Cold, mpc_config());
  EXPECT_TRUE(warm.stats.all_solved());
  EXPECT_TRUE(cold.stats.all_solved());
  EXPECT_LE(warm.stats.mean_iterations, 0.6 * cold.stats.mean_iterations);
}

INSTANTIATE_TEST_SUITE_P(BundledExamples, WarmstartDominance,
                         ::testing::Values("double-integrator", "mass-spring"),
                         [](const auto& info) {
                           return info.param == "mass-spring" ? std::string("MassSpring")
                                                              : std::string("DoubleIntegrator");
                         });

TEST(RunSequenceTest, ShiftedWarmstartAlsoSolves) {
  SequenceOptions shifted;
  shifted.shift_warmstart = true;
  const auto spec = mass_spring_chain();
  const auto run = run_sequence(spec, 50, StartMode::Warm, mpc_config(), shifted);
  const auto plain = run_sequence(spec, 50, StartMode::Warm, mpc_config());
  EXPECT_TRUE(run.stats.all_solved());
  EXPECT_LE(run.stats.mean_iterations, plain.stats.mean_iterations);
}

}  // namespace
}  // namespace fbrs::mpc
