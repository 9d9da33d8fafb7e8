#include "fbrs/oracle.hpp"

#include <gtest/gtest.h>

#include <random>

#include "fbrs/random_qp.hpp"
#include "test_problems.hpp"

namespace fbrs {
namespace {

using testing::mat;
using testing::point;
using testing::vec;

TEST(EnumerationTest, OneDimensionalQp) {
  const auto r = solve_by_enumeration(testing::one_dim_qp());
  ASSERT_EQ(r.status, EnumerationStatus::Solved);
  EXPECT_NEAR(r.x.z(0), 0.5, 1e-15);
  EXPECT_NEAR(r.x.v(0), 0.5, 1e-15);
  EXPECT_EQ(r.active_set, 1u);
}

TEST(EnumerationTest, BoxQp) {
  const auto r = solve_by_enumeration(testing::box_qp());
  ASSERT_EQ(r.status, EnumerationStatus::Solved);
  EXPECT_LE((r.x.z - vec({1, 1})).norm(), 1e-14);
  EXPECT_LE((r.x.v - vec({1, 1})).norm(), 1e-14);
  EXPECT_EQ(r.active_set, 3u);
}

TEST(EnumerationTest, EmptyActiveSet) {
  const auto r = solve_by_enumeration(testing::inactive_qp());
  ASSERT_EQ(r.status, EnumerationStatus::Solved);
  EXPECT_EQ(r.x.z(0), 0.0);
  EXPECT_EQ(r.x.v(0), 0.0);
  EXPECT_EQ(r.active_set, 0u);
}

TEST(EnumerationTest, Infeasible) {
  // z ≤ −1 and −z ≤ −1
  const QpProblem<double> p(mat({{1}}), vec({0}), mat({{1}, {-1}}), vec({-1, -1}));
  EXPECT_EQ(solve_by_enumeration(p).status, EnumerationStatus::Infeasible);
}

TEST(EnumerationTest, Unbounded) {
  // H = 0 in the z₂ direction with z₂ unconstrained below; A covers ker H
  const QpProblem<double> p(mat({{1, 0}, {0, 0}}), vec({0, 1}), mat({{0, 1}}),
                            vec({1}));
  // dual infeasible objective: every vertex candidate has v < 0
  const auto r = solve_by_enumeration(p);
  EXPECT_EQ(r.status, EnumerationStatus::Unbounded);
}

TEST(EnumerationTest, TooLarge) {
  std::mt19937_64 rng(20);
  const auto p = random_strictly_convex_qp(rng, 9, 4);
  EXPECT_EQ(solve_by_enumeration(p).status, EnumerationStatus::TooLarge);
  const auto p2 = random_strictly_convex_qp(rng, 2, 17);
  EXPECT_EQ(solve_by_enumeration(p2).status, EnumerationStatus::TooLarge);
}

TEST(EnumerationTest, DuplicateRowsStillSolve) {
  // same constraint twice: A_S with both rows is rank deficient and skipped
  const QpProblem<double> p(mat({{1}}), vec({-1}), mat({{1}, {1}}), vec({0.5, 0.5}));
  const auto r = solve_by_enumeration(p);
  ASSERT_EQ(r.status, EnumerationStatus::Solved);
  EXPECT_NEAR(r.x.z(0), 0.5, 1e-15);
  EXPECT_NEAR(r.x.v.sum(), 0.5, 1e-15);
  EXPECT_TRUE(verify_kkt(p, r.x, 1e-12).pass);
}

TEST(VerifyKktTest, Reports) {
  const auto p = testing::one_dim_qp();
  EXPECT_TRUE(verify_kkt(p, point({0.5}, {0.5}), 1e-12).pass);

  const auto off = verify_kkt(p, point({1}, {-1}), 1e-8);
  EXPECT_FALSE(off.pass);
  EXPECT_DOUBLE_EQ(off.stationarity_norm, 1.0);
  EXPECT_DOUBLE_EQ(off.primal_infeasibility, 0.5);
  EXPECT_DOUBLE_EQ(off.dual_infeasibility, 1.0);
  EXPECT_DOUBLE_EQ(off.complementarity, 0.5);
}

TEST(EnumerationPropertyTest, OracleOutputsPassKkt) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> n_dist(1, 5), q_dist(1, 10);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = n_dist(rng), q = q_dist(rng);
    const auto p = random_strictly_convex_qp(rng, n, q);
    const auto r = solve_by_enumeration(p);
    ASSERT_EQ(r.status, EnumerationStatus::Solved);
    EXPECT_TRUE(verify_kkt(p, r.x, 1e-8).pass);
    // the active set bitmask agrees with the multipliers
    for (int i = 0; i < q; ++i) {
      if (!(r.active_set & (1u << i))) EXPECT_EQ(r.x.v(i), 0.0);
    }
  }
}

TEST(EnumerationPropertyTest, NoFeasibleCandidateHasLowerObjective) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_strictly_convex_qp(rng, 2, 4);
    const auto r = solve_by_enumeration(p);
    ASSERT_EQ(r.status, EnumerationStatus::Solved);
    const double best = objective(p, r.x.z);
    for (int s = 0; s < 200; ++s) {
      const Eigen::VectorXd z = r.x.z + random_normal_vector(rng, 2, 0.5);
      if ((p.A() * z - p.b()).maxCoeff() <= 0) {
        EXPECT_GE(objective(p, z), best - 1e-12);
      }
    }
  }
}

}  // namespace
}  // namespace fbrs
