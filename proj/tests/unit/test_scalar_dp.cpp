#include "avgtrack/errors.hpp"
#include "avgtrack/scalar_dp.hpp"
#include "generators.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace avgtrack {
namespace {

const Grid1D kGrid(-2.0, 2.0, 4001);

const ValueTable& reference_table() {
  static const ValueTable table = value_iteration(testing::scalar_context(), kGrid, ControlGrid{});
  return table;
}

TEST(Grid1D, Validation) {
  EXPECT_THROW(Grid1D(0.0, 1.0, 101), InvalidArgument);
  EXPECT_THROW(Grid1D(-1.0, 1.0, 100), InvalidArgument);
  const Grid1D g(-1.0, 1.0, 101);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.02);
  EXPECT_DOUBLE_EQ(g.node(50), 0.0);
}

TEST(Grid1D, InterpolatesLinearlyAndClamps) {
  const Grid1D g(-1.0, 1.0, 101);
  std::vector<double> values(101);
  for (int i = 0; i < 101; ++i) values[i] = 3.0 * g.node(i) + 1.0;
  EXPECT_NEAR(g.interpolate(values, 0.123), 1.369, 1e-12);
  EXPECT_NEAR(g.interpolate(values, 5.0), 4.0, 1e-12);
  EXPECT_NEAR(g.interpolate(values, -5.0), -2.0, 1e-12);
}

TEST(ClosedForm, ValueExamples) {
  EXPECT_DOUBLE_EQ(closed_form_value(0.0), 0.0);
  EXPECT_NEAR(closed_form_value(0.4), 2.0, 1e-12);
  EXPECT_NEAR(closed_form_value(0.5), 2.75, 1e-12);
  EXPECT_NEAR(closed_form_value(0.6), (26 * 0.36 + 22 * 0.6 - 1) / 6, 1e-12);
  EXPECT_NEAR(closed_form_value(0.6), 3.5933, 1e-4);
  EXPECT_NEAR(closed_form_value(1.0), 7.9721, 1e-3);
  EXPECT_DOUBLE_EQ(closed_form_value(-0.7), closed_form_value(0.7));
}

TEST(ClosedForm, ContinuousAtInnerBoundary) {
  const double inner = 5 * 0.25 + 3 * 0.5;
  const double middle = (26 * 0.25 + 22 * 0.5 - 1) / 6;
  EXPECT_DOUBLE_EQ(inner, 2.75);
  EXPECT_DOUBLE_EQ(middle, 2.75);
  EXPECT_NEAR(closed_form_value(std::nextafter(0.5, 1.0)), 2.75, 1e-12);
}

TEST(ClosedForm, PolicyExamples) {
  EXPECT_DOUBLE_EQ(closed_form_policy(0.0), 0.0);
  EXPECT_NEAR(closed_form_policy(0.4), -0.8, 1e-12);
  EXPECT_NEAR(closed_form_policy(0.6), -7.0 / 6.0, 1e-12);
  EXPECT_NEAR(closed_form_policy(-0.6), 7.0 / 6.0, 1e-12);
  EXPECT_NEAR(closed_form_policy(11.0), -18.088, 1e-2);
  EXPECT_NEAR(closed_form_policy(-11.0), 18.088, 1e-2);
  EXPECT_NEAR(closed_form_policy(0.809), -1.618 * 0.809 - 0.29, 1e-12);
}

TEST(BellmanResidual, ClosedFormPair) {
  const StageContext ctx = testing::scalar_context();
  const auto v = [](double x) { return closed_form_value(x); };
  const auto p = [](double x) { return closed_form_policy(x); };
  EXPECT_EQ(bellman_residual(v, p, ctx, 0.0, -6.0, 6.0), 0.0);
  EXPECT_LE(bellman_residual(v, p, ctx, 0.3, -6.0, 6.0), 1e-6);
  for (double x : {0.1, 0.2, 0.4, -0.25}) EXPECT_LE(bellman_residual(v, p, ctx, x, -6.0, 6.0), 1e-4) << x;
  EXPECT_LE(bellman_residual(v, p, ctx, 0.809, -6.0, 6.0), 0.1);
}

TEST(BellmanResidual, DetectsWrongValueFunction) {
  const StageContext ctx = testing::scalar_context();
  const auto v = [](double x) { return 2.0 * closed_form_value(x); };
  const auto p = [](double x) { return closed_form_policy(x); };
  EXPECT_GT(bellman_residual(v, p, ctx, 0.3, -6.0, 6.0), 0.1);
}

TEST(ScalarStage, Kinds) {
  const StageContext ctx = testing::scalar_context();
  // Quadratic part 0.8, linear part -0.4 - 0.8.
  EXPECT_NEAR(scalar_stage(ctx, -0.4, 0.8, BellmanStage::AbsoluteDeviation), 0.4, 1e-12);
  EXPECT_NEAR(scalar_stage(ctx, -0.4, 0.8, BellmanStage::Surrogate), 2.0, 1e-12);
}

TEST(ValueIteration, RejectsNonScalarProblem) {
  testing::Rng rng(83);
  const TrackingProblem prob = testing::random_tracking_problem(rng, 2, 1);
  const StageContext ctx(prob, steady_state(prob));
  EXPECT_THROW(value_iteration(ctx, kGrid, ControlGrid{}), InvalidArgument);
}

TEST(ValueIteration, UnreachableOriginDoesNotConverge) {
  // Control spacing 0.005 never lands 2x on a multiple of the state spacing,
  // so most nodes pay a positive cost forever.
  const ControlGrid coarse{-6.0, 6.0, 2401};
  const Grid1D grid(-1.0, 1.0, 2001);
  EXPECT_THROW(value_iteration(testing::scalar_context(), grid, coarse, 1e-9, 50), NoConvergence);
}

TEST(ValueIteration, ReferenceGridInvariants) {
  const ValueTable& table = reference_table();
  ASSERT_EQ(table.values.size(), 4001U);
  EXPECT_LE(table.residual, 1e-9);
  for (double v : table.values) EXPECT_GE(v, 0.0);
  EXPECT_LE(std::abs(table.value_at(0.0)), kGrid.spacing());
}

TEST(ValueIteration, MatchesClosedFormInInnerRegion) {
  const ValueTable& table = reference_table();
  const double u_tol = 2.0 * ControlGrid{}.spacing();
  for (int i = 0; i < kGrid.size(); ++i) {
    const double x = kGrid.node(i);
    if (std::abs(x) > 0.45) continue;
    EXPECT_NEAR(table.values[i], closed_form_value(x), 2e-2) << x;
    EXPECT_NEAR(table.policy[i], closed_form_policy(x), u_tol) << x;
  }
  EXPECT_NEAR(table.value_at(0.4), 2.0, 2e-2);
  EXPECT_NEAR(table.policy_at(0.4), -0.8, ControlGrid{}.spacing());
}

TEST(ValueIteration, OddSymmetry) {
  const ValueTable& table = reference_table();
  const int last = kGrid.size() - 1;
  for (int i = 0; i <= last; ++i) {
    EXPECT_NEAR(table.values[i], table.values[last - i], 2 * kGrid.spacing());
    // Near-ties may resolve to neighbouring controls on either side.
    EXPECT_NEAR(table.policy[i], -table.policy[last - i], ControlGrid{}.spacing() + 1e-12);
  }
}

TEST(ValueIteration, SweepsAreMonotone) {
  const StageContext ctx = testing::scalar_context();
  const Grid1D grid(-1.0, 1.0, 1001);
  const ControlGrid controls{-3.0, 3.0, 3001};
  std::vector<double> values(grid.size(), 0.0);
  for (int sweep = 0; sweep < 6; ++sweep) {
    const SweepResult next = bellman_sweep(ctx, grid, controls, values);
    for (int i = 0; i < grid.size(); ++i) ASSERT_GE(next.values[i], values[i] - 1e-12);
    values = next.values;
  }
}

TEST(ValueIteration, GridRefinementIsStable) {
  // Halving both spacings moves the inner-region error by far less than the
  // acceptance tolerance.
  const StageContext ctx = testing::scalar_context();
  const ValueTable coarse = value_iteration(ctx, Grid1D(-2.0, 2.0, 2001), ControlGrid{-6.0, 6.0, 3001});
  const ValueTable& fine = reference_table();
  double coarse_err = 0.0;
  double fine_err = 0.0;
  for (double x = -0.45; x <= 0.45; x += 0.01) {
    coarse_err = std::max(coarse_err, std::abs(coarse.value_at(x) - closed_form_value(x)));
    fine_err = std::max(fine_err, std::abs(fine.value_at(x) - closed_form_value(x)));
  }
  EXPECT_LT(coarse_err, 2e-2);
  EXPECT_LT(fine_err, 2e-2);
  EXPECT_LT(std::abs(coarse_err - fine_err), 0.25 * 2e-2);
}

TEST(ValueIteration, AbsoluteDeviationStageIsBelowSurrogate) {
  const StageContext ctx = testing::scalar_context();
  const Grid1D grid(-1.0, 1.0, 1001);
  const ControlGrid controls{-3.0, 3.0, 3001};
  const ValueTable sur = value_iteration(ctx, grid, controls);
  const ValueTable dev = value_iteration(ctx, grid, controls, 1e-9, 2000, BellmanStage::AbsoluteDeviation);
  for (int i = 0; i < grid.size(); ++i) EXPECT_LE(dev.values[i], sur.values[i] + 1e-9);
}

}  // namespace
}  // namespace avgtrack
