#include <gtest/gtest.h>

#include <cmath>

#include "hrelay/errors.hpp"
#include "hrelay/optimizer.hpp"

using namespace hrelay;

namespace {

OptimizerOptions coarse() {
  OptimizerOptions o;
  o.seed_grid = 7;
  o.omega_tol = 1e-3;
  o.log_power_tol = 1e-3;
  return o;
}

}  // namespace

TEST(Optimizer, SplitUpperBound) {
  const SystemConfig c;
  EXPECT_NEAR(omega_upper_bound(c, 1.0), 0.96, 1e-12);
  EXPECT_NEAR(omega_upper_bound(c, 1e6), 1.0 - 1e-6, 1e-15);
  EXPECT_LT(omega_upper_bound(c, 0.01), 0.0);
}

TEST(Optimizer, ZeroCapacityTargetReturnsLowerBracket) {
  const auto r = solve_p1(SystemConfig{}, 0.0, 1.0, Protocol::ESAP, coarse());
  EXPECT_TRUE(r.feasible);
  EXPECT_NEAR(r.p_s_star, 1e-3, 1e-12);
}

TEST(Optimizer, UnreachableTargetsAreInfeasible) {
  DesignEvaluator eval(SystemConfig{}, Protocol::ESAP, coarse());
  EXPECT_FALSE(solve_p1(eval, 1e7, 1.0).feasible);
  EXPECT_FALSE(solve_p2(eval, 0.999, 1.0).feasible);
  EXPECT_FALSE(solve_p1(eval, 1e3, 0.01).feasible);
  EXPECT_THROW(solve_p2(eval, 1.0, 1.0), DomainError);
  EXPECT_THROW(solve_p1(eval, -1.0, 1.0), DomainError);
}

TEST(Optimizer, P1MeetsTargetAtLeastPower) {
  DesignEvaluator eval(SystemConfig{}, Protocol::ESAP, coarse());
  const auto r = solve_p1(eval, 12000.0, 1.0);
  ASSERT_TRUE(r.feasible);
  EXPECT_GE(r.constraint_values.at("capacity"), 12000.0 * (1.0 - 1e-3));
  EXPECT_EQ(r.constraint_values.at("monotone_prescan"), 1.0);
  // Slightly less power cannot reach the target at any split on a fine scan.
  const double below = r.p_s_star * std::pow(10.0, -0.01);
  double best = 0.0;
  for (int i = 1; i <= 96; ++i) best = std::max(best, eval(0.96 * i / 96.0, below).capacity);
  EXPECT_LT(best, 12000.0);
}

TEST(Optimizer, P2FeasibleAndConsistentWithP1) {
  DesignEvaluator eval(SystemConfig{}, Protocol::ESAP, coarse());
  const auto p2 = solve_p2(eval, 0.5, 1.0);
  ASSERT_TRUE(p2.feasible);
  EXPECT_GE(p2.constraint_values.at("success"), 0.5 - 1e-6);
  EXPECT_NEAR(p2.objective, p2.constraint_values.at("capacity") / p2.p_s_star, 1e-9 * p2.objective);
  const auto p1 = solve_p1(eval, p2.constraint_values.at("capacity"), 1.0);
  ASSERT_TRUE(p1.feasible);
  EXPECT_LE(std::log10(p1.p_s_star), std::log10(p2.p_s_star) + 2e-3);
}

TEST(Optimizer, P2BeatsCoarseGrid) {
  DesignEvaluator eval(SystemConfig{}, Protocol::ESAP, coarse());
  const auto r = solve_p2(eval, 0.0, 1.0);
  const auto g = design_grid(eval, 1.0, 15, 15);
  double best = 0.0;
  for (const auto& d : g.points) best = std::max(best, d.efficiency);
  EXPECT_GE(r.objective, best * (1.0 - 1e-9));
  EXPECT_EQ(g.points.size(), 225u);
  EXPECT_NEAR(g.omegas.back(), omega_upper_bound(SystemConfig{}, 1.0), 1e-12);
  EXPECT_NEAR(g.powers.front(), 1e-3, 1e-15);
}

TEST(Optimizer, EvaluatorMemoizes) {
  DesignEvaluator eval(SystemConfig{}, Protocol::PureABR, coarse());
  const auto a = eval(0.4, 0.1);
  const auto b = eval(0.4, 0.1);
  EXPECT_EQ(eval.evaluations(), 1u);
  EXPECT_EQ(a.capacity, b.capacity);
  EXPECT_NEAR(a.efficiency, a.capacity / 0.1, 1e-9);
}

TEST(Optimizer, SimulatorInTheLoopIsSeeded) {
  auto o = coarse();
  o.use_simulator = true;
  o.simulator_slots = 400;
  DesignEvaluator e1(SystemConfig{}, Protocol::ESAP, o), e2(SystemConfig{}, Protocol::ESAP, o);
  EXPECT_EQ(e1(0.4, 0.1).success, e2(0.4, 0.1).success);
  EXPECT_EQ(e1(0.4, 0.1).capacity, e2(0.4, 0.1).capacity);
}
