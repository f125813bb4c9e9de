#pragma once

#include "avgtrack/matnum.hpp"

namespace avgtrack {

/// minimize 0.5 z^T H z + g^T z + constant
/// subject to E z = f, G z <= h.
struct QpProblem {
  Matrix H;
  Vector g;
  double constant = 0.0;
  Matrix E;
  Vector f;
  Matrix G;
  Vector h;

  Eigen::Index num_vars() const { return H.rows(); }
  double objective(const Vector& z) const { return 0.5 * z.dot(H * z) + g.dot(z) + constant; }
};

/// Throws DimensionMismatch / InvalidArgument if the shapes disagree or H is
/// not symmetric positive semidefinite within 1e-8.
void validate(const QpProblem& qp);

enum class QpStatus { Solved, MaxIters };

struct QpSolution {
  Vector z;
  Vector lambda;  // equality multipliers
  Vector mu;      // inequality multipliers, >= 0
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool polished = false;
  QpStatus status = QpStatus::MaxIters;
};

struct QpSettings {
  double tol = 1e-8;
  int max_iters = 50000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;  // over-relaxation
  double equality_rho_scale = 1e3;
  int check_every = 5;
  int adapt_every = 50;
  int scaling_passes = 10;  // Ruiz equilibration passes, 0 disables
  bool polish = true;
  int polish_steps = 25;  // active-set corrections per polish attempt
};

/// Operator-splitting (ADMM) solve: each iteration solves one regularized
/// linear system for the primal step, then projects the constraint values onto
/// the equality set and the inequality half-spaces, with over-relaxation and
/// an adaptive step size. The data are equilibrated first; residuals and the
/// returned solution refer to the original problem. When the active set settles, a polish step solves
/// the reduced KKT system exactly, correcting the guessed active set a few
/// rows at a time until the multipliers are nonnegative and the inactive rows
/// feasible. Termination: primal and dual residual infinity norms
/// <= tol * (1 + magnitude of the terms each residual sums). On MaxIters
/// the last iterate is still returned.
QpSolution solve_qp(const QpProblem& qp, const QpSettings& settings);
QpSolution solve_qp(const QpProblem& qp, double tol, int max_iters);

struct KktReport {
  double stationarity = 0.0;        // ||H z + g + E^T lambda + G^T mu||_inf
  double equality_violation = 0.0;  // ||E z - f||_inf
  double inequality_violation = 0.0;
  double min_multiplier = 0.0;      // min(mu), 0 if no inequalities
  double complementarity = 0.0;     // max |mu_i (G z - h)_i|

  double worst() const;
};

KktReport kkt_report(const QpProblem& qp, const QpSolution& sol);

}  // namespace avgtrack
