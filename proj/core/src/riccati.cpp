#include "avgtrack/riccati.hpp"

#include "avgtrack/errors.hpp"

#include <string>

namespace avgtrack {

namespace {

void require_weights(const LinearSystem& sys, const Matrix& q, const Matrix& r) {
  if (q.rows() != sys.p() || q.cols() != sys.p()) {
    throw DimensionMismatch("Q must be p x p");
  }
  if (r.rows() != sys.m() || r.cols() != sys.m()) {
    throw DimensionMismatch("R must be m x m");
  }
}

// (R + B^T P B)^{-1} B^T P A through a Cholesky factorization of the
// (symmetrized) input Hessian.
Matrix gain_from(const LinearSystem& sys, const Matrix& p, const Matrix& r) {
  const Matrix& a = sys.A();
  const Matrix& b = sys.B();
  Matrix hessian = r + b.transpose() * p * b;
  hessian = 0.5 * (hessian + hessian.transpose());
  Eigen::LLT<Matrix> llt(hessian);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("R + B^T P B is not positive definite");
  }
  return llt.solve(b.transpose() * p * a);
}

}  // namespace

Matrix lqr_gain(const LinearSystem& sys, const Matrix& p, const Matrix& r) {
  if (p.rows() != sys.n() || p.cols() != sys.n()) {
    throw DimensionMismatch("P must be n x n");
  }
  if (r.rows() != sys.m() || r.cols() != sys.m()) {
    throw DimensionMismatch("R must be m x m");
  }
  return gain_from(sys, p, r);
}

double dare_residual(const LinearSystem& sys, const Matrix& q, const Matrix& r, const Matrix& p) {
  const Matrix& a = sys.A();
  const Matrix& b = sys.B();
  const Matrix w = sys.C().transpose() * q * sys.C();
  const Matrix k = gain_from(sys, p, r);
  const Matrix res = a.transpose() * p * a - p - a.transpose() * p * b * k + w;
  return inf_norm(res);
}

LqrSolution solve_dare(const LinearSystem& sys, const Matrix& q, const Matrix& r, double tol, int max_iters) {
  require_weights(sys, q, r);
  if (!(tol > 0.0) || max_iters < 1) {
    throw InvalidArgument("solve_dare: tol must be positive and max_iters >= 1");
  }
  cholesky(q);
  cholesky(r);

  const Matrix& a = sys.A();
  const Matrix& b = sys.B();
  const Matrix w = sys.C().transpose() * q * sys.C();

  Matrix p = w;
  for (int it = 1; it <= max_iters; ++it) {
    const Matrix k = gain_from(sys, p, r);
    Matrix next = a.transpose() * p * a - a.transpose() * p * b * k + w;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite()) {
      throw NoConvergence("solve_dare: Riccati iterates diverged");
    }
    const double change = inf_norm(next - p);
    p = std::move(next);
    if (change <= tol * (1.0 + inf_norm(p))) {
      LqrSolution sol;
      sol.P = p;
      sol.K = gain_from(sys, p, r);
      sol.iterations = it;
      sol.residual = dare_residual(sys, q, r, p);
      const double radius = spectral_radius(a - b * sol.K);
      if (!(radius < 1.0)) {
        throw NoConvergence("solve_dare: fixed point does not stabilize A - BK (spectral radius " +
                            std::to_string(radius) + ")");
      }
      return sol;
    }
  }
  throw NoConvergence("solve_dare: no convergence within " + std::to_string(max_iters) + " iterations");
}

Controller lqr_tracking_controller(const LinearSystem& sys, const Matrix& k, const SteadyState& ss) {
  if (k.rows() != sys.m() || k.cols() != sys.n()) {
    throw DimensionMismatch("K must be m x n");
  }
  const double radius = spectral_radius(sys.A() - sys.B() * k);
  if (!(radius < 1.0)) {
    throw UnstableGain("A - BK has spectral radius " + std::to_string(radius) + " >= 1");
  }
  return Controller{"LQR", [k, x_ss = ss.x_ss, u_ss = ss.u_ss](const Vector& x) -> Vector {
                      return -k * (x - x_ss) + u_ss;
                    }};
}

}  // namespace avgtrack
