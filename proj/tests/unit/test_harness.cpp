#include "avgtrack/errors.hpp"
#include "avgtrack/harness.hpp"
#include "avgtrack/riccati.hpp"
#include "generators.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace avgtrack {
namespace {

using testing::scalar;

Controller deadbeat(const SteadyState& ss) {
  return Controller{"deadbeat", [ss](const Vector& x) -> Vector { return -2.0 * (x - ss.x_ss) + ss.u_ss; }};
}

void expect_trajectory_invariants(const LinearSystem& sys, const Trajectory& t) {
  ASSERT_EQ(t.states.size(), t.inputs.size() + 1);
  ASSERT_EQ(t.outputs.size(), t.states.size());
  for (std::size_t k = 0; k < t.inputs.size(); ++k) {
    const Vector next = sys.A() * t.states[k] + sys.B() * t.inputs[k];
    EXPECT_LE((next - t.states[k + 1]).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + next.cwiseAbs().maxCoeff()));
  }
  for (std::size_t k = 0; k < t.states.size(); ++k)
    EXPECT_LE((sys.C() * t.states[k] - t.outputs[k]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rollout, DeadbeatReachesSteadyStateInOneStep) {
  const StageContext ctx = testing::scalar_context();
  const SteadyState& ss = ctx.steady();
  const Trajectory t = rollout(ctx.system(), deadbeat(ss), ss.x_ss + Vector::Constant(1, 0.4), 5);
  ASSERT_EQ(t.steps(), 5U);
  EXPECT_NEAR(t.states[0](0) - ss.x_ss(0), 0.4, 1e-15);
  for (std::size_t k = 1; k < t.states.size(); ++k) EXPECT_NEAR(t.states[k](0), ss.x_ss(0), 1e-15);
}

TEST(Rollout, ConstantSteadyInputHoldsSteadyState) {
  testing::Rng rng(89);
  const TrackingProblem prob = testing::random_tracking_problem(rng, 3, 2);
  const SteadyState ss = steady_state(prob);
  const Controller hold{"hold", [ss](const Vector&) -> Vector { return ss.u_ss; }};
  const Trajectory t = rollout(prob.system(), hold, ss.x_ss, 10);
  for (const Vector& x : t.states) EXPECT_LE((x - ss.x_ss).cwiseAbs().maxCoeff(), 1e-10);
  for (const Vector& y : t.outputs) EXPECT_LE((y - prob.reference()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Rollout, LqrDecaysGeometrically) {
  const StageContext ctx = testing::scalar_context();
  const LqrSolution lqr = solve_dare(ctx.system(), ctx.problem().Q(), ctx.problem().R());
  const Controller ctrl = lqr_tracking_controller(ctx.system(), lqr.K, ctx.steady());
  const Trajectory t = rollout(ctx.system(), ctrl, Vector::Constant(1, 12.0), 20);
  const double rate = 2.0 - lqr.K(0, 0);
  for (std::size_t k = 0; k < t.states.size(); ++k)
    EXPECT_NEAR(t.states[k](0) - 1.0, 11.0 * std::pow(rate, static_cast<double>(k)), 1e-6);
  EXPECT_NEAR(rate, 0.382, 1e-3);
  expect_trajectory_invariants(ctx.system(), t);
}

TEST(Rollout, Errors) {
  const StageContext ctx = testing::scalar_context();
  const Controller zero{"zero", [](const Vector&) -> Vector { return Vector::Zero(1); }};
  EXPECT_THROW(rollout(ctx.system(), zero, Vector::Constant(1, 1.0), 0), InvalidArgument);
  EXPECT_THROW(rollout(ctx.system(), zero, Vector::Constant(1, 12.0), 2000), NonFinite);
  const Controller wide{"wide", [](const Vector&) -> Vector { return Vector::Zero(2); }};
  EXPECT_THROW(rollout(ctx.system(), wide, Vector::Constant(1, 1.0), 3), DimensionMismatch);
}

TEST(Properties, RandomRolloutsSatisfyTrajectoryInvariants) {
  testing::Rng rng(97);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 1 + trial % 3;
    const Eigen::Index m = 1 + trial % std::min<Eigen::Index>(n, 2);
    const TrackingProblem prob = testing::random_tracking_problem(rng, n, m);
    const LqrSolution lqr = solve_dare(prob.system(), prob.Q(), prob.R());
    const Controller ctrl = lqr_tracking_controller(prob.system(), lqr.K, steady_state(prob));
    expect_trajectory_invariants(prob.system(), rollout(prob.system(), ctrl, testing::random_vector(rng, n, 3.0), 50));
  }
}

TEST(ExactScalarController, Examples) {
  const SteadyState ss = steady_state(testing::scalar_example());
  const Controller ctrl = exact_scalar_controller(ss);
  EXPECT_DOUBLE_EQ(ctrl(ss.x_ss)(0), ss.u_ss(0));
  EXPECT_NEAR(ctrl(Vector::Constant(1, 12.0))(0), -19.088, 1e-2);
  EXPECT_NEAR(ctrl(ss.x_ss + Vector::Constant(1, 0.4))(0), -0.8 + ss.u_ss(0), 1e-12);
}

TEST(ConvergenceMetrics, Examples) {
  const StageContext ctx = testing::scalar_context();
  const SteadyState& ss = ctx.steady();
  const Controller hold{"hold", [ss](const Vector&) -> Vector { return ss.u_ss; }};
  const ConvergenceMetrics steady = convergence_metrics(rollout(ctx.system(), hold, ss.x_ss, 5), ctx.problem(), 1e-3);
  ASSERT_TRUE(steady.settling_step.has_value());
  EXPECT_EQ(*steady.settling_step, 0);
  EXPECT_EQ(steady.final_error, 0.0);

  const LqrSolution lqr = solve_dare(ctx.system(), ctx.problem().Q(), ctx.problem().R());
  const Controller ctrl = lqr_tracking_controller(ctx.system(), lqr.K, ss);
  const Trajectory t = rollout(ctx.system(), ctrl, Vector::Constant(1, 12.0), 40);
  const ConvergenceMetrics lqr_metrics = convergence_metrics(t, ctx.problem(), 1e-3);
  ASSERT_TRUE(lqr_metrics.settling_step.has_value());
  const int expected = static_cast<int>(std::ceil(std::log(11.0 / 1e-3) / std::log(1.0 / (2.0 - lqr.K(0, 0)))));
  EXPECT_EQ(expected, 10);
  EXPECT_EQ(*lqr_metrics.settling_step, expected);

  const Controller zero{"zero", [](const Vector&) -> Vector { return Vector::Zero(1); }};
  const ConvergenceMetrics diverging =
      convergence_metrics(rollout(ctx.system(), zero, Vector::Constant(1, 1.5), 20), ctx.problem(), 1e-3);
  EXPECT_FALSE(diverging.settling_step.has_value());
}

TEST(AdaptiveRollout, StopsOnTailRule) {
  const StageContext ctx = testing::scalar_context();
  const LqrSolution lqr = solve_dare(ctx.system(), ctx.problem().Q(), ctx.problem().R());
  const Controller ctrl = lqr_tracking_controller(ctx.system(), lqr.K, ctx.steady());
  const AdaptiveRollout ar = adaptive_rollout(ctx, ctrl, Vector::Constant(1, 12.0));
  ASSERT_TRUE(ar.converged);
  EXPECT_GE(ar.trajectory.steps(), 8U);
  EXPECT_TRUE(tail_converged(avg_cost_terms(ctx, ar.trajectory)));

  const Controller zero{"zero", [](const Vector&) -> Vector { return Vector::Zero(1); }};
  EXPECT_THROW(adaptive_rollout(ctx, zero, Vector::Constant(1, 12.0)), NonFinite);
}

TEST(BenchmarkTable, SteadyStartGivesZeroIndices) {
  const StageContext ctx = testing::scalar_context();
  const LqrSolution lqr = solve_dare(ctx.system(), ctx.problem().Q(), ctx.problem().R());
  const std::vector<Controller> ctrls{lqr_tracking_controller(ctx.system(), lqr.K, ctx.steady()),
                                      exact_scalar_controller(ctx.steady())};
  for (const BenchmarkRow& row : benchmark_table(ctx, ctrls, ctx.steady().x_ss)) {
    EXPECT_EQ(row.avg_index, 0.0);
    EXPECT_EQ(row.surrogate_index, 0.0);
    EXPECT_EQ(row.quadratic_index, 0.0);
    EXPECT_TRUE(row.converged);
  }
}

TEST(BenchmarkTable, DivergentRowIsFlagged) {
  const StageContext ctx = testing::scalar_context();
  const LqrSolution lqr = solve_dare(ctx.system(), ctx.problem().Q(), ctx.problem().R());
  const std::vector<Controller> ctrls{
      Controller{"open-loop", [](const Vector&) -> Vector { return Vector::Zero(1); }},
      lqr_tracking_controller(ctx.system(), lqr.K, ctx.steady())};
  const std::vector<BenchmarkRow> rows = benchmark_table(ctx, ctrls, Vector::Constant(1, 12.0));
  ASSERT_EQ(rows.size(), 2U);
  EXPECT_EQ(rows[0].method, "open-loop");
  EXPECT_TRUE(rows[0].diverged);
  EXPECT_FALSE(rows[0].converged);
  EXPECT_TRUE(std::isinf(rows[0].avg_index));
  EXPECT_FALSE(rows[0].failure.empty());
  EXPECT_EQ(rows[1].method, "LQR");
  EXPECT_FALSE(rows[1].diverged);
  EXPECT_TRUE(rows[1].converged);
}

TEST(BenchmarkTable, FixedHorizonAndOrdering) {
  const StageContext ctx = testing::scalar_context();
  const LqrSolution lqr = solve_dare(ctx.system(), ctx.problem().Q(), ctx.problem().R());
  const std::vector<Controller> ctrls{exact_scalar_controller(ctx.steady()),
                                      lqr_tracking_controller(ctx.system(), lqr.K, ctx.steady())};
  const std::vector<BenchmarkRow> rows = benchmark_table(ctx, ctrls, Vector::Constant(1, 12.0), 60);
  ASSERT_EQ(rows.size(), 2U);
  EXPECT_EQ(rows[0].method, "Exact-scalar");
  EXPECT_EQ(rows[1].method, "LQR");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].steps, 60);
    EXPECT_GE(rows[i].avg_index, 0.0);
    const Trajectory t = rollout(ctx.system(), ctrls[i], Vector::Constant(1, 12.0), 60);
    EXPECT_GE(rows[i].surrogate_index, deviation_abs_index(ctx, t) - 1e-9);
  }
  // The LQR cost-to-go bounds its own quadratic sum: P x~0^2.
  EXPECT_NEAR(rows[1].quadratic_index, lqr.P(0, 0) * 121.0, 1e-6);
}

TEST(Properties, BenchmarkIsDeterministic) {
  const StageContext ctx = testing::scalar_context();
  const LqrSolution lqr = solve_dare(ctx.system(), ctx.problem().Q(), ctx.problem().R());
  const std::vector<Controller> ctrls{lqr_tracking_controller(ctx.system(), lqr.K, ctx.steady()),
                                      exact_scalar_controller(ctx.steady())};
  const auto first = benchmark_table(ctx, ctrls, Vector::Constant(1, 12.0));
  const auto second = benchmark_table(ctx, ctrls, Vector::Constant(1, 12.0));
  ASSERT_EQ(first.size(), second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i].avg_index, second[i].avg_index);
    EXPECT_EQ(first[i].surrogate_index, second[i].surrogate_index);
    EXPECT_EQ(first[i].quadratic_index, second[i].quadratic_index);
    EXPECT_EQ(first[i].steps, second[i].steps);
  }
}

}  // namespace
}  // namespace avgtrack
