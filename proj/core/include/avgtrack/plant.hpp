#pragma once

#include "avgtrack/matnum.hpp"

namespace avgtrack {

/// Discrete-time plant x_{k+1} = A x_k + B u_k, y_k = C x_k.
class LinearSystem {
 public:
  /// Throws DimensionMismatch unless A is n x n, B is n x m and C is p x n,
  /// and InvalidArgument on non-finite entries.
  LinearSystem(Matrix a, Matrix b, Matrix c);

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& C() const { return c_; }

  Eigen::Index n() const { return a_.rows(); }
  Eigen::Index m() const { return b_.cols(); }
  Eigen::Index p() const { return c_.rows(); }

  Vector step(const Vector& x, const Vector& u) const;

 private:
  Matrix a_;
  Matrix b_;
  Matrix c_;
};

/// Plant plus output weight Q (p x p), input weight R (m x m) and the constant
/// reference r_ss the output should track.
class TrackingProblem {
 public:
  /// Q and R must be symmetric positive definite (NotPositiveDefinite otherwise).
  TrackingProblem(LinearSystem system, Matrix q, Matrix r, Vector r_ss);

  const LinearSystem& system() const { return system_; }
  const Matrix& Q() const { return q_; }
  const Matrix& R() const { return r_; }
  const Vector& reference() const { return r_ss_; }

  /// C^T Q C, the state weight of the deviation stage cost.
  Matrix state_weight() const;

 private:
  LinearSystem system_;
  Matrix q_;
  Matrix r_;
  Vector r_ss_;
};

/// How the linear terms of the deviation stage cost are formed.
///
/// HalfLinearTerms: s = C^T Q C x_ss, r_lin = R u_ss (the default,
/// which gives the |x - u| term of the scalar example).
/// ExactExpansion:   s = 2 C^T Q C x_ss, r_lin = 2 R u_ss, so that the
/// deviation stage equals C(x, u) - C_ss exactly.
enum class Convention { HalfLinearTerms, ExactExpansion };

struct SteadyState {
  Vector x_ss;
  Vector u_ss;
  Vector s;
  Vector r_lin;
  double C_ss = 0.0;
  Convention convention = Convention::HalfLinearTerms;
};

/// Kalman rank test rank([B, AB, ..., A^{n-1} B]) == n with tol 1e-9.
bool check_controllable(const LinearSystem& sys);

/// Observability of (A, L^T C) with L = cholesky(Q).
bool check_observable(const LinearSystem& sys, const Matrix& q);

/// Solves [[A - I, B], [C, 0]] [x_ss; u_ss] = [0; r_ss].
///
/// Throws DimensionMismatch when p != m and AssumptionTwoViolated when the
/// block matrix is singular. Assumption checks are not enforced here.
SteadyState steady_state(const TrackingProblem& prob, Convention convention = Convention::HalfLinearTerms);

struct DeviationPair {
  Vector x;
  Vector u;
};

DeviationPair to_deviation(const Vector& x, const Vector& u, const SteadyState& ss);
Vector state_deviation(const Vector& x, const SteadyState& ss);
Vector from_deviation(const Vector& u_dev, const SteadyState& ss);

}  // namespace avgtrack
