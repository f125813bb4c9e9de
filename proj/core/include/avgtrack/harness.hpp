#pragma once

#include "avgtrack/criteria.hpp"
#include "avgtrack/trajectory.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace avgtrack {

/// Iterates x_{k+1} = A x_k + B ctrl(x_k) for exactly T steps.
/// Throws NonFinite if a state or input overflows or becomes NaN.
Trajectory rollout(const LinearSystem& sys, const Controller& ctrl, const Vector& x0, int steps);

/// Stopping rule for "infinite-horizon" indices: run until the last quarter
/// of the average-cost contributions adds less than tail_fraction of the
/// total, never fewer than min_steps and never more than max_steps.
struct AdaptiveHorizon {
  int min_steps = 8;
  int max_steps = 10000;
  double tail_fraction = 1e-6;
};

struct AdaptiveRollout {
  Trajectory trajectory;
  bool converged = false;
};

AdaptiveRollout adaptive_rollout(const StageContext& ctx, const Controller& ctrl, const Vector& x0,
                                 const AdaptiveHorizon& horizon = {});

/// x -> closed_form_policy(x - x_ss) + u_ss for the scalar reference example.
Controller exact_scalar_controller(const SteadyState& ss);

struct BenchmarkRow {
  std::string method;
  double avg_index = 0.0;
  double surrogate_index = 0.0;
  double quadratic_index = 0.0;
  bool converged = false;
  bool diverged = false;
  int steps = 0;
  std::string failure;  // set when diverged
};

/// One row per controller, in input order. With no fixed horizon the adaptive
/// rule picks T per row. A controller that diverges or fails yields a row with
/// diverged = true and infinite indices instead of aborting the table.
std::vector<BenchmarkRow> benchmark_table(const StageContext& ctx, std::span<const Controller> controllers,
                                          const Vector& x0, std::optional<int> steps = std::nullopt,
                                          const AdaptiveHorizon& horizon = {});

struct ConvergenceMetrics {
  std::optional<int> settling_step;
  double final_error = 0.0;
};

/// First k after which ||C x_j - r_ss||_inf <= tol for every j >= k, and the
/// error of the final state. A trajectory whose final error exceeds tol has
/// no settling step.
ConvergenceMetrics convergence_metrics(const Trajectory& traj, const TrackingProblem& prob, double tol);

}  // namespace avgtrack
