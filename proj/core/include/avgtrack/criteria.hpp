#pragma once

#include "avgtrack/plant.hpp"
#include "avgtrack/trajectory.hpp"

#include <span>
#include <vector>

namespace avgtrack {

/// A tracking problem together with the steady state computed from it.
class StageContext {
 public:
  /// Throws InvalidArgument if ss does not match prob (dimensions, or
  /// C x_ss != r_ss beyond 1e-8).
  StageContext(TrackingProblem problem, SteadyState ss);

  const TrackingProblem& problem() const { return problem_; }
  const SteadyState& steady() const { return ss_; }
  const LinearSystem& system() const { return problem_.system(); }
  const Matrix& state_weight() const { return w_; }

 private:
  TrackingProblem problem_;
  SteadyState ss_;
  Matrix w_;
};

/// x^T C^T Q C x + u^T R u, the stage cost whose steady value is C_ss.
double stage_cost(const StageContext& ctx, const Vector& x, const Vector& u);

/// e^T Q e + u^T R u with e = C x - r_ss.
double tracking_error_cost(const StageContext& ctx, const Vector& x, const Vector& u);

/// Signed deviation phi = x~^T C^T Q C x~ + u~^T R u~ + s^T x~ + r_lin^T u~.
double stage_deviation(const StageContext& ctx, const Vector& x_dev, const Vector& u_dev);

/// Upper bound x~^T C^T Q C x~ + u~^T R u~ + |s^T x~ + r_lin^T u~| >= |phi|.
double surrogate_stage(const StageContext& ctx, const Vector& x_dev, const Vector& u_dev);

double quadratic_stage(const StageContext& ctx, const Vector& x_dev, const Vector& u_dev);

/// Per-stage |stage_cost - C_ss| for k = 0 .. T-1.
std::vector<double> avg_cost_terms(const StageContext& ctx, const Trajectory& traj);

/// Sum over the trajectory of |stage_cost(x_k, u_k) - C_ss|.
double avg_cost_index(const StageContext& ctx, const Trajectory& traj);

/// Sum of |phi_k| (the rewritten deviation form of the average-cost index).
double deviation_abs_index(const StageContext& ctx, const Trajectory& traj);

double surrogate_index(const StageContext& ctx, const Trajectory& traj);

/// Sum of x~^T C^T Q C x~ + u~^T R u~.
double quadratic_index(const StageContext& ctx, const Trajectory& traj);

/// True when the last quarter of the contributions adds less than
/// rel_tol times their total (or the total is zero).
bool tail_converged(std::span<const double> contributions, double rel_tol = 1e-6);

}  // namespace avgtrack
