#include <gtest/gtest.h>

#include <cmath>

#include "support/random_instances.hpp"
#include "waterline/oracle.hpp"
#include "waterline/solver_core.hpp"

using namespace waterline;
using waterline::testing::Rng;
using waterline::testing::TestFamily;

namespace {

Objective unit_log(double b = 1.0) { return Objective::log_capacity(1, 1, b); }

}  // namespace

TEST(WaterLevel, SymmetricLogCapacity) {
  const std::vector<Objective> objs{unit_log(), unit_log()};
  const std::vector<std::size_t> active{0, 1};
  EXPECT_DOUBLE_EQ(solve_water_level(objs, active, 0.0, 2.0), 0.5);
}

TEST(WaterLevel, SingleChannel) {
  const std::vector<Objective> objs{unit_log()};
  const std::vector<std::size_t> active{0};
  EXPECT_DOUBLE_EQ(solve_water_level(objs, active, 0.0, 1.0), 0.5);
}

TEST(WaterLevel, SumLogBisectionMeetsBudget) {
  Rng rng(21);
  std::vector<Objective> objs;
  for (int k = 0; k < 3; ++k) objs.push_back(waterline::testing::random_objective(rng, TestFamily::SumLog));
  const std::vector<std::size_t> active{0, 1, 2};
  const double P = 4.0;
  const double mu = solve_water_level(objs, active, 0.0, P);
  double total = 0.0;
  for (const auto& f : objs) total += f.inverse_rate(mu);
  EXPECT_LE(std::abs(total - P), 1e-9 * P);
}

TEST(SolveP1, Symmetric) {
  const auto a = solve_p1(SimplexProblem{{unit_log(), unit_log()}, 2.0, {}});
  EXPECT_NEAR(a.powers[0], 1.0, 1e-14);
  EXPECT_NEAR(a.powers[1], 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(a.water_level, 0.5);
  EXPECT_EQ(a.status, Status::Optimal);
}

TEST(SolveP1, DeactivatesWeakChannel) {
  const SimplexProblem pb{{unit_log(1), unit_log(3)}, 1.0, {}};
  const auto a = solve_p1(pb);
  EXPECT_NEAR(a.powers[0], 1.0, 1e-14);
  EXPECT_EQ(a.powers[1], 0.0);
  EXPECT_DOUBLE_EQ(a.water_level, 0.5);
  EXPECT_LE(pb.objectives[1].rate(0.0), a.water_level);
  const auto ref = enumerate_p1(pb);
  EXPECT_NEAR(ref.powers[0], 1.0, 1e-12);
  EXPECT_EQ(a.active_set, std::vector<std::size_t>{0});
  EXPECT_EQ(a.lower_set, std::vector<std::size_t>{1});
}

TEST(SolveP1, InverseMseUsesSquaredLevel) {
  const SimplexProblem pb{{Objective::inverse_mse(1, 1, 1), Objective::inverse_mse(1, 1, 1.5)}, 1.0, {}};
  const auto a = solve_p1(pb);
  EXPECT_NEAR(a.powers[0], 0.75, 1e-14);
  EXPECT_NEAR(a.powers[1], 0.25, 1e-14);
  EXPECT_NEAR(a.water_level, std::pow(2.0 / 3.5, 2), 1e-15);
  const auto ref = enumerate_p1(pb);
  EXPECT_NEAR(ref.powers[0], 0.75, 1e-12);
}

TEST(SolveP1, RejectsLowerBounds) {
  EXPECT_THROW(solve_p1(SimplexProblem{{unit_log(), unit_log()}, 2.0, {0.5, 0.0}}), Error);
}

TEST(SolveP1, RejectsBadBudget) {
  EXPECT_THROW(solve_p1(SimplexProblem{{unit_log()}, 0.0, {}}), Error);
  EXPECT_THROW(solve_p1(SimplexProblem{{}, 1.0, {}}), Error);
}

TEST(SolveP1Lower, ZeroBoundsReduceToP1) {
  Rng rng(22);
  for (int i = 0; i < 50; ++i) {
    auto pb = waterline::testing::random_simplex(rng, TestFamily::LogCapacity, 5, false);
    const auto a = solve_p1(pb);
    pb.lower.assign(5, 0.0);
    const auto b = solve_p1_lower(pb);
    EXPECT_EQ(a.powers, b.powers);
  }
}

TEST(SolveP1Lower, BudgetConsumedByBound) {
  const auto a = solve_p1_lower(SimplexProblem{{unit_log(), unit_log()}, 2.0, {2.0, 0.0}});
  EXPECT_DOUBLE_EQ(a.powers[0], 2.0);
  EXPECT_DOUBLE_EQ(a.powers[1], 0.0);
}

TEST(SolveP1Lower, SlackBoundLeavesOptimumUnchanged) {
  const SimplexProblem pb{{unit_log(), unit_log()}, 2.0, {0.5, 0.0}};
  const auto a = solve_p1_lower(pb);
  EXPECT_NEAR(a.powers[0], 1.0, 1e-14);
  EXPECT_NEAR(a.powers[1], 1.0, 1e-14);
  const auto ref = enumerate_p1(pb);
  EXPECT_NEAR(ref.powers[0], 1.0, 1e-12);
}

TEST(SolveP1Lower, InfeasibleBoundsRejected) {
  EXPECT_THROW(solve_p1_lower(SimplexProblem{{unit_log(), unit_log()}, 1.0, {0.8, 0.8}}), Error);
}

TEST(SolveP1, LoopBoundAndRisingLevelOnRandomInstances) {
  Rng rng(23);
  for (auto fam : waterline::testing::kSumFormFamilies) {
    for (int i = 0; i < 40; ++i) {
      const auto K = static_cast<std::size_t>(rng.integer(2, 6));
      const auto pb = waterline::testing::random_simplex(rng, fam, K, i % 2 == 1);
      const auto a = pb.has_lower_bounds() ? solve_p1_lower(pb) : solve_p1(pb);
      EXPECT_LE(a.iterations, static_cast<int>(K) - 1);
      for (std::size_t t = 1; t < a.water_level_trace.size(); ++t) {
        EXPECT_GT(a.water_level_trace[t], a.water_level_trace[t - 1]);
      }
      const auto ref = enumerate_p1(pb);
      EXPECT_NEAR(a.objective_value, ref.objective, 1e-8 * std::max(1.0, std::abs(ref.objective)));
    }
  }
}

TEST(KktP1, OwnSolutionPasses) {
  const SimplexProblem pb{{unit_log(1), unit_log(3)}, 1.0, {}};
  const auto a = solve_p1(pb);
  const auto rep = kkt_residual_p1(pb, a);
  EXPECT_TRUE(rep.pass());
  EXPECT_LE(rep.max_residual(), 1e-8);
}

TEST(KktP1, PerturbedAllocationFlagsRateSpread) {
  const SimplexProblem pb{{unit_log(), unit_log()}, 2.0, {}};
  Allocation a;
  a.powers = {1.1, 0.9};
  const auto rep = kkt_residual_p1(pb, a);
  ASSERT_NE(rep.find("rate_spread"), nullptr);
  EXPECT_GT(rep.find("rate_spread")->residual, 0.0);
  EXPECT_FALSE(rep.pass());
}

TEST(KktP1, UniformAllocationFlagsWeakChannel) {
  const SimplexProblem pb{{unit_log(1), unit_log(3)}, 1.0, {}};
  Allocation a;
  a.powers = {0.5, 0.5};
  const auto rep = kkt_residual_p1(pb, a);
  EXPECT_FALSE(rep.pass());
  // both channels count as active, so their rates must agree; the
  // residual is the spread relative to the mean rate
  const double r1 = 1 / 1.5, r2 = 1 / 3.5;
  EXPECT_NEAR(rep.find("rate_spread")->residual, (r1 - r2) / (0.5 * (r1 + r2)), 1e-14);
}
