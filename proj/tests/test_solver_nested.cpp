#include <gtest/gtest.h>

#include "support/random_instances.hpp"
#include "waterline/oracle.hpp"
#include "waterline/solver_nested.hpp"

using namespace waterline;
using waterline::testing::Rng;

namespace {

Objective unit_log() { return Objective::log_capacity(1, 1, 1); }

}  // namespace

TEST(Ascending, TwoChannelSplit) {
  const AscendingProblem pb{{unit_log(), unit_log()}, {0.5, 2.0}, {}, {}};
  const auto a = solve_ascending(pb);
  EXPECT_NEAR(a.powers[0], 0.5, 1e-12);
  EXPECT_NEAR(a.powers[1], 1.5, 1e-12);
  EXPECT_EQ(a.iterations, 1);
  const auto grid = grid_search(pb);
  EXPECT_NEAR(grid.powers[0], 0.5, 1e-5);
  EXPECT_NEAR(grid.objective, a.objective_value, 1e-8);
}

TEST(Ascending, SlackPrefixesReduceToBox) {
  Rng rng(41);
  for (int i = 0; i < 30; ++i) {
    auto box = waterline::testing::random_box(rng, 5);
    AscendingProblem pb{box.objectives, std::vector<double>(5, box.budget), box.lower, box.upper};
    const auto a = solve_ascending(pb);
    const auto b = solve_box(box);
    EXPECT_LE(waterline::testing::linf(a.powers, b.powers), 1e-12);
    EXPECT_EQ(a.iterations, 0);
  }
}

TEST(Ascending, SingleSplitMatchesExhaustiveOracle) {
  const AscendingProblem pb{{unit_log(), Objective::log_capacity(1, 2, 1), Objective::log_capacity(1, 0.5, 1)},
                            {0.3, 3.0, 3.0},
                            {},
                            {}};
  const auto a = solve_ascending(pb);
  ASSERT_EQ(a.iterations, 1);
  const auto ref = enumerate_ascending(pb);
  EXPECT_LE(waterline::testing::linf(a.powers, ref.powers), 1e-9);
  const auto grid = grid_search(pb);
  EXPECT_NEAR(grid.objective, a.objective_value, 1e-6);
}

TEST(Ascending, AlwaysFeasibleOnRandomInstances) {
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    const auto K = static_cast<std::size_t>(rng.integer(2, 7));
    const auto pb = waterline::testing::random_ascending(rng, K);
    const auto a = solve_ascending(pb);
    EXPECT_LE(ascending_violation(pb, a.powers), 1e-12);
    if (a.status == Status::Optimal) {
      EXPECT_TRUE(check_conditions(pb, a.powers).pass());
    }
  }
}

TEST(Ascending, LaterLowerBoundsAreReserved) {
  // without tightening the first channel would take the whole first budget
  // and leave nothing for the lower bound of the second
  const AscendingProblem pb{{Objective::log_capacity(1, 5, 1), unit_log()}, {1.0, 1.2}, {0.0, 0.5}, {}};
  const auto a = solve_ascending(pb);
  EXPECT_LE(ascending_violation(pb, a.powers), 1e-12);
  EXPECT_GE(a.powers[1], 0.5);
  const auto t = tightened_prefix_budgets(pb);
  EXPECT_DOUBLE_EQ(t[0], 0.7);
}

TEST(Ascending, RejectsDecreasingBudgets) {
  EXPECT_THROW(solve_ascending(AscendingProblem{{unit_log(), unit_log()}, {2.0, 1.0}, {}, {}}), Error);
}

TEST(KktAscending, FlagsPrefixViolation) {
  const AscendingProblem pb{{unit_log(), unit_log()}, {0.5, 2.0}, {}, {}};
  const auto rep = check_conditions(pb, std::vector<double>{1, 1});
  EXPECT_FALSE(rep.pass());
  EXPECT_GT(rep.find("feasibility")->residual, 0.0);
  EXPECT_TRUE(check_conditions(pb, std::vector<double>{0.5, 1.5}).pass());
}
