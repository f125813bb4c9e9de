#include "avgtrack/harness.hpp"

#include "avgtrack/errors.hpp"
#include "avgtrack/scalar_dp.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace avgtrack {

namespace {

void push_step(const LinearSystem& sys, Trajectory& traj, const Controller& ctrl) {
  const Vector& x = traj.states.back();
  Vector u = ctrl(x);
  if (u.size() != sys.m()) {
    throw DimensionMismatch("controller '" + ctrl.name + "' returned " + std::to_string(u.size()) +
                            " inputs, expected " + std::to_string(sys.m()));
  }
  if (!u.allFinite()) {
    throw NonFinite("controller '" + ctrl.name + "' produced a non-finite input at step " +
                    std::to_string(traj.inputs.size()));
  }
  Vector next = sys.step(x, u);
  if (!next.allFinite()) {
    throw NonFinite("state became non-finite at step " + std::to_string(traj.inputs.size() + 1));
  }
  traj.inputs.push_back(std::move(u));
  traj.outputs.push_back(sys.C() * next);
  traj.states.push_back(std::move(next));
}

Trajectory start(const LinearSystem& sys, const Vector& x0) {
  if (x0.size() != sys.n()) {
    throw DimensionMismatch("initial state has " + std::to_string(x0.size()) + " entries, expected " +
                            std::to_string(sys.n()));
  }
  if (!x0.allFinite()) throw NonFinite("initial state is not finite");
  Trajectory traj;
  traj.states.push_back(x0);
  traj.outputs.push_back(sys.C() * x0);
  return traj;
}

}  // namespace

Trajectory rollout(const LinearSystem& sys, const Controller& ctrl, const Vector& x0, int steps) {
  if (steps < 1) throw InvalidArgument("rollout requires at least one step");
  Trajectory traj = start(sys, x0);
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  traj.inputs.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) push_step(sys, traj, ctrl);
  return traj;
}

AdaptiveRollout adaptive_rollout(const StageContext& ctx, const Controller& ctrl, const Vector& x0,
                                 const AdaptiveHorizon& horizon) {
  if (horizon.min_steps < 4 || horizon.max_steps < horizon.min_steps || !(horizon.tail_fraction > 0.0)) {
    throw InvalidArgument("adaptive horizon needs 4 <= min_steps <= max_steps and a positive tail fraction");
  }
  const LinearSystem& sys = ctx.system();
  AdaptiveRollout out;
  out.trajectory = start(sys, x0);
  Trajectory& traj = out.trajectory;

  // prefix[k] = sum of the first k average-cost contributions.
  std::vector<double> prefix{0.0};
  for (int t = 1; t <= horizon.max_steps; ++t) {
    push_step(sys, traj, ctrl);
    const double term = std::abs(stage_cost(ctx, traj.states[static_cast<std::size_t>(t - 1)],
                                            traj.inputs.back()) -
                                 ctx.steady().C_ss);
    prefix.push_back(prefix.back() + term);
    if (t < horizon.min_steps) continue;
    const std::size_t tail_start = static_cast<std::size_t>(t - t / 4);
    const double total = prefix.back();
    const double tail = total - prefix[tail_start];
    if (total == 0.0 || tail < horizon.tail_fraction * total) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

Controller exact_scalar_controller(const SteadyState& ss) {
  if (ss.x_ss.size() != 1 || ss.u_ss.size() != 1) {
    throw InvalidArgument("the closed-form scalar controller needs a scalar problem");
  }
  return Controller{"Exact-scalar", [x_ss = ss.x_ss(0), u_ss = ss.u_ss(0)](const Vector& x) -> Vector {
                      if (x.size() != 1) throw DimensionMismatch("closed-form scalar controller expects one state");
                      Vector u(1);
                      u(0) = closed_form_policy(x(0) - x_ss) + u_ss;
                      return u;
                    }};
}

std::vector<BenchmarkRow> benchmark_table(const StageContext& ctx, std::span<const Controller> controllers,
                                          const Vector& x0, std::optional<int> steps,
                                          const AdaptiveHorizon& horizon) {
  if (controllers.empty()) throw InvalidArgument("benchmark_table needs at least one controller");
  std::vector<BenchmarkRow> rows;
  rows.reserve(controllers.size());
  for (const Controller& ctrl : controllers) {
    BenchmarkRow row;
    row.method = ctrl.name;
    try {
      Trajectory traj;
      if (steps) {
        traj = rollout(ctx.system(), ctrl, x0, *steps);
        row.converged = tail_converged(avg_cost_terms(ctx, traj), horizon.tail_fraction);
      } else {
        AdaptiveRollout ar = adaptive_rollout(ctx, ctrl, x0, horizon);
        traj = std::move(ar.trajectory);
        row.converged = ar.converged;
      }
      row.steps = static_cast<int>(traj.steps());
      row.avg_index = avg_cost_index(ctx, traj);
      row.surrogate_index = surrogate_index(ctx, traj);
      row.quadratic_index = quadratic_index(ctx, traj);
    } catch (const NonFinite& e) {
      row.diverged = true;
      row.failure = e.what();
    } catch (const SolverFailure& e) {
      row.diverged = true;
      row.failure = e.what();
    }
    if (row.diverged) {
      constexpr double inf = std::numeric_limits<double>::infinity();
      row.avg_index = row.surrogate_index = row.quadratic_index = inf;
      row.converged = false;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ConvergenceMetrics convergence_metrics(const Trajectory& traj, const TrackingProblem& prob, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("convergence_metrics: tol must be positive");
  if (traj.states.empty()) throw InvalidArgument("convergence_metrics: empty trajectory");
  const Matrix& c = prob.system().C();
  const Vector& r = prob.reference();
  std::vector<double> errors;
  errors.reserve(traj.states.size());
  for (const Vector& x : traj.states) {
    const Vector e = c * x - r;
    errors.push_back(e.allFinite() ? e.cwiseAbs().maxCoeff() : std::numeric_limits<double>::infinity());
  }
  ConvergenceMetrics out;
  out.final_error = errors.back();
  if (!(out.final_error <= tol)) return out;
  int k = static_cast<int>(errors.size()) - 1;
  while (k > 0 && errors[static_cast<std::size_t>(k - 1)] <= tol) --k;
  out.settling_step = k;
  return out;
}

}  // namespace avgtrack
