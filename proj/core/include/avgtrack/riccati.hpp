#pragma once

#include "avgtrack/plant.hpp"
#include "avgtrack/trajectory.hpp"

namespace avgtrack {

struct LqrSolution {
  Matrix P;  // value matrix
  Matrix K;  // feedback gain, u~ = -K x~
  int iterations = 0;
  double residual = 0.0;  // infinity norm of the DARE residual
};

/// Stabilizing solution of the discrete algebraic Riccati equation with state
/// weight C^T Q C and input weight R, by the fixed-point recursion
///
///   P <- A^T P A - A^T P B (R + B^T P B)^{-1} B^T P A + C^T Q C,  P_0 = C^T Q C
///
/// stopped once successive iterates differ by at most tol * (1 + ||P||) in
/// the infinity norm. Throws NoConvergence after max_iters or when the fixed point does not
/// stabilize A - BK, and NotPositiveDefinite if R + B^T P B loses definiteness.
LqrSolution solve_dare(const LinearSystem& sys, const Matrix& q, const Matrix& r, double tol = 1e-10,
                       int max_iters = 10000);

/// K = (R + B^T P B)^{-1} B^T P A.
Matrix lqr_gain(const LinearSystem& sys, const Matrix& p, const Matrix& r);

/// Infinity norm of A^T P A - P - A^T P B (R + B^T P B)^{-1} B^T P A + C^T Q C.
double dare_residual(const LinearSystem& sys, const Matrix& q, const Matrix& r, const Matrix& p);

/// u = -K (x - x_ss) + u_ss. Throws UnstableGain unless rho(A - BK) < 1.
Controller lqr_tracking_controller(const LinearSystem& sys, const Matrix& k, const SteadyState& ss);

}  // namespace avgtrack
