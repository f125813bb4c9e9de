#include "avgtrack/errors.hpp"
#include "avgtrack/riccati.hpp"
#include "generators.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace avgtrack {
namespace {

using testing::scalar;

TEST(SolveDare, ScalarExample) {
  const LinearSystem sys(scalar(2.0), scalar(1.0), scalar(1.0));
  const LqrSolution sol = solve_dare(sys, scalar(1.0), scalar(1.0));
  EXPECT_NEAR(sol.P(0, 0), 4.2361, 1e-3);
  EXPECT_NEAR(sol.K(0, 0), 1.618, 1e-3);
  EXPECT_NEAR(sol.P(0, 0), 2.0 + std::sqrt(5.0), 1e-9);
  EXPECT_NEAR(sol.K(0, 0), (1.0 + std::sqrt(5.0)) / 2.0, 1e-9);
  EXPECT_LE(sol.residual, 1e-8 * (1.0 + sol.P(0, 0)));
}

TEST(SolveDare, StableUncontrolledPlant) {
  // P = 0.25 P + 1.
  const LinearSystem sys(scalar(0.5), scalar(0.0), scalar(1.0));
  const LqrSolution sol = solve_dare(sys, scalar(1.0), scalar(1.0));
  EXPECT_NEAR(sol.P(0, 0), 4.0 / 3.0, 1e-9);
  EXPECT_EQ(sol.K(0, 0), 0.0);
}

TEST(SolveDare, DeadbeatPlant) {
  const LinearSystem sys(scalar(0.0), scalar(1.0), scalar(1.0));
  const LqrSolution sol = solve_dare(sys, scalar(1.0), scalar(1.0));
  EXPECT_DOUBLE_EQ(sol.P(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(sol.K(0, 0), 0.0);
}

TEST(SolveDare, UnstableUncontrollableModeFails) {
  const LinearSystem sys(scalar(2.0), scalar(0.0), scalar(1.0));
  EXPECT_THROW(solve_dare(sys, scalar(1.0), scalar(1.0)), NoConvergence);
}

TEST(SolveDare, UnobservedUnstableModeIsNotStabilized) {
  // C = 0: the fixed point P = 0 gives K = 0 and A - BK = 2.
  const LinearSystem sys(scalar(2.0), scalar(1.0), scalar(0.0));
  EXPECT_THROW(solve_dare(sys, scalar(1.0), scalar(1.0)), NoConvergence);
}

TEST(SolveDare, IterationBudget) {
  const LinearSystem sys(scalar(2.0), scalar(1.0), scalar(1.0));
  EXPECT_THROW(solve_dare(sys, scalar(1.0), scalar(1.0), 1e-10, 2), NoConvergence);
}

TEST(LqrGain, Examples) {
  const LinearSystem sys(scalar(2.0), scalar(1.0), scalar(1.0));
  EXPECT_NEAR(lqr_gain(sys, scalar(2.0 + std::sqrt(5.0)), scalar(1.0))(0, 0), (1.0 + std::sqrt(5.0)) / 2.0, 1e-12);
  EXPECT_EQ(lqr_gain(LinearSystem(scalar(2.0), scalar(0.0), scalar(1.0)), scalar(3.0), scalar(1.0))(0, 0), 0.0);
  EXPECT_EQ(lqr_gain(sys, scalar(0.0), scalar(1.0))(0, 0), 0.0);
}

TEST(LqrTrackingController, ScalarExample) {
  const TrackingProblem prob = testing::scalar_example();
  const SteadyState ss = steady_state(prob);
  const Controller ctrl = lqr_tracking_controller(prob.system(), scalar(1.618), ss);
  EXPECT_DOUBLE_EQ(ctrl(ss.x_ss)(0), ss.u_ss(0));
  EXPECT_NEAR(ctrl(Vector::Constant(1, 12.0))(0), -18.798, 1e-2);
  // Closed loop x~_{k+1} = (2 - 1.618) x~_k.
  const Vector x = Vector::Constant(1, 12.0);
  const Vector next = prob.system().step(x, ctrl(x));
  EXPECT_NEAR(next(0) - ss.x_ss(0), 0.382 * 11.0, 1e-12);
}

TEST(LqrTrackingController, RejectsUnstableGain) {
  const TrackingProblem prob = testing::scalar_example();
  EXPECT_THROW(lqr_tracking_controller(prob.system(), scalar(0.5), steady_state(prob)), UnstableGain);
}

// Independent finite-horizon recursion from P = 0, written with explicit
// inverses rather than the library's Cholesky-based gain.
Matrix finite_horizon_value(const LinearSystem& sys, const Matrix& q, const Matrix& r, int steps) {
  const Matrix& a = sys.A();
  const Matrix& b = sys.B();
  const Matrix w = sys.C().transpose() * q * sys.C();
  Matrix p = Matrix::Zero(a.rows(), a.cols());
  for (int k = 0; k < steps; ++k) {
    p = w + a.transpose() * p * a -
        a.transpose() * p * b * (r + b.transpose() * p * b).inverse() * b.transpose() * p * a;
  }
  return p;
}

// Finite-horizon value matrix by condensing: minimize over the stacked input
// sequence the quadratic cost of a T-step trajectory, x0 -> x0^T P_T x0.
Matrix condensed_value(const LinearSystem& sys, const Matrix& q, const Matrix& r, int steps) {
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  const Matrix w = sys.C().transpose() * q * sys.C();
  // x_k = Phi_k x0 + sum_j Gamma_{k,j} u_j, stages k = 0 .. T-1.
  Matrix phi = Matrix::Zero(steps * n, n);
  Matrix gamma = Matrix::Zero(steps * n, steps * m);
  Matrix power = Matrix::Identity(n, n);
  for (int k = 0; k < steps; ++k) {
    phi.middleRows(k * n, n) = power;
    power = sys.A() * power;
    for (int j = 0; j < k; ++j) {
      Matrix ak = Matrix::Identity(n, n);
      for (int i = 0; i < k - 1 - j; ++i) ak = sys.A() * ak;
      gamma.block(k * n, j * m, n, m) = ak * sys.B();
    }
  }
  Matrix wbig = Matrix::Zero(steps * n, steps * n);
  Matrix rbig = Matrix::Zero(steps * m, steps * m);
  for (int k = 0; k < steps; ++k) {
    wbig.block(k * n, k * n, n, n) = w;
    rbig.block(k * m, k * m, m, m) = r;
  }
  const Matrix hess = gamma.transpose() * wbig * gamma + rbig;
  const Matrix cross = gamma.transpose() * wbig * phi;
  return phi.transpose() * wbig * phi - cross.transpose() * hess.ldlt().solve(cross);
}

TEST(SolveDare, RandomSystemsAgreeWithFiniteHorizonLimit) {
  testing::Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 1 + trial % 2;
    const TrackingProblem prob = testing::random_tracking_problem(rng, n, 1);
    const LinearSystem& sys = prob.system();
    const LqrSolution sol = solve_dare(sys, prob.Q(), prob.R());

    EXPECT_TRUE(is_symmetric(sol.P, 1e-8));
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(sol.P).eigenvalues().minCoeff(), -1e-8);
    EXPECT_LE(sol.residual, 1e-8 * (1.0 + inf_norm(sol.P)));
    EXPECT_LT(spectral_radius(sys.A() - sys.B() * sol.K), 1.0);

    const Matrix brute = finite_horizon_value(sys, prob.Q(), prob.R(), 500);
    EXPECT_LE((brute - sol.P).cwiseAbs().maxCoeff(), 1e-6 * (1.0 + inf_norm(sol.P))) << "trial " << trial;
  }
}

TEST(FiniteHorizonOracle, RecursionMatchesCondensedProgram) {
  testing::Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 1 + trial % 2;
    const TrackingProblem prob = testing::random_tracking_problem(rng, n, 1, 0.5);
    const Matrix rec = finite_horizon_value(prob.system(), prob.Q(), prob.R(), 12);
    const Matrix cond = condensed_value(prob.system(), prob.Q(), prob.R(), 12);
    EXPECT_LE((rec - cond).cwiseAbs().maxCoeff(), 1e-8 * (1.0 + inf_norm(rec)));
  }
}

TEST(SolveDare, MonotoneInOutputWeight) {
  testing::Rng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 1 + trial % 2;
    const TrackingProblem prob = testing::random_tracking_problem(rng, n, 1);
    const LinearSystem& sys = prob.system();
    const double alpha = 1.5 + 0.25 * trial;
    const Matrix p = solve_dare(sys, prob.Q(), prob.R()).P;
    const Matrix p_scaled = solve_dare(sys, alpha * prob.Q(), prob.R()).P;
    Matrix diff = p_scaled - p + 1e-10 * Matrix::Identity(n, n);
    diff = 0.5 * (diff + diff.transpose());
    EXPECT_NO_THROW(cholesky(diff)) << "trial " << trial;
  }
}

}  // namespace
}  // namespace avgtrack
