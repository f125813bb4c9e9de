#include "avgtrack/criteria.hpp"

#include "avgtrack/errors.hpp"

#include <cmath>
#include <numeric>
#include <utility>

namespace avgtrack {

namespace {

void require_nonempty(const Trajectory& traj) {
  if (traj.inputs.empty()) {
    throw InvalidArgument("cost index requires a trajectory with at least one input");
  }
  if (traj.states.size() < traj.inputs.size()) {
    throw InvalidArgument("trajectory has fewer states than inputs");
  }
}

template <typename StageFn>
double sum_stages(const Trajectory& traj, StageFn&& stage) {
  require_nonempty(traj);
  double total = 0.0;
  for (std::size_t k = 0; k < traj.inputs.size(); ++k) {
    total += stage(traj.states[k], traj.inputs[k]);
  }
  return total;
}

}  // namespace

StageContext::StageContext(TrackingProblem problem, SteadyState ss)
    : problem_(std::move(problem)), ss_(std::move(ss)), w_(problem_.state_weight()) {
  const LinearSystem& sys = problem_.system();
  if (ss_.x_ss.size() != sys.n() || ss_.u_ss.size() != sys.m() || ss_.s.size() != sys.n() ||
      ss_.r_lin.size() != sys.m()) {
    throw InvalidArgument("steady state dimensions do not match the tracking problem");
  }
  const double gap = (sys.C() * ss_.x_ss - problem_.reference()).cwiseAbs().maxCoeff();
  if (gap > 1e-8) {
    throw InvalidArgument("steady state does not reproduce the reference (C x_ss - r_ss)");
  }
}

double stage_cost(const StageContext& ctx, const Vector& x, const Vector& u) {
  return x.dot(ctx.state_weight() * x) + u.dot(ctx.problem().R() * u);
}

double tracking_error_cost(const StageContext& ctx, const Vector& x, const Vector& u) {
  const Vector e = ctx.system().C() * x - ctx.problem().reference();
  return e.dot(ctx.problem().Q() * e) + u.dot(ctx.problem().R() * u);
}

double quadratic_stage(const StageContext& ctx, const Vector& x_dev, const Vector& u_dev) {
  return x_dev.dot(ctx.state_weight() * x_dev) + u_dev.dot(ctx.problem().R() * u_dev);
}

double stage_deviation(const StageContext& ctx, const Vector& x_dev, const Vector& u_dev) {
  const SteadyState& ss = ctx.steady();
  return quadratic_stage(ctx, x_dev, u_dev) + ss.s.dot(x_dev) + ss.r_lin.dot(u_dev);
}

double surrogate_stage(const StageContext& ctx, const Vector& x_dev, const Vector& u_dev) {
  const SteadyState& ss = ctx.steady();
  return quadratic_stage(ctx, x_dev, u_dev) + std::abs(ss.s.dot(x_dev) + ss.r_lin.dot(u_dev));
}

std::vector<double> avg_cost_terms(const StageContext& ctx, const Trajectory& traj) {
  require_nonempty(traj);
  std::vector<double> terms;
  terms.reserve(traj.inputs.size());
  for (std::size_t k = 0; k < traj.inputs.size(); ++k) {
    terms.push_back(std::abs(stage_cost(ctx, traj.states[k], traj.inputs[k]) - ctx.steady().C_ss));
  }
  return terms;
}

double avg_cost_index(const StageContext& ctx, const Trajectory& traj) {
  const std::vector<double> terms = avg_cost_terms(ctx, traj);
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

double deviation_abs_index(const StageContext& ctx, const Trajectory& traj) {
  const SteadyState& ss = ctx.steady();
  return sum_stages(traj, [&](const Vector& x, const Vector& u) {
    return std::abs(stage_deviation(ctx, x - ss.x_ss, u - ss.u_ss));
  });
}

double surrogate_index(const StageContext& ctx, const Trajectory& traj) {
  const SteadyState& ss = ctx.steady();
  return sum_stages(traj,
                    [&](const Vector& x, const Vector& u) { return surrogate_stage(ctx, x - ss.x_ss, u - ss.u_ss); });
}

double quadratic_index(const StageContext& ctx, const Trajectory& traj) {
  const SteadyState& ss = ctx.steady();
  return sum_stages(traj,
                    [&](const Vector& x, const Vector& u) { return quadratic_stage(ctx, x - ss.x_ss, u - ss.u_ss); });
}

bool tail_converged(std::span<const double> contributions, double rel_tol) {
  if (contributions.empty()) return false;
  const std::size_t tail_start = contributions.size() - contributions.size() / 4;
  const double total = std::accumulate(contributions.begin(), contributions.end(), 0.0);
  const double tail = std::accumulate(contributions.begin() + static_cast<std::ptrdiff_t>(tail_start),
                                      contributions.end(), 0.0);
  if (total == 0.0) return true;
  return tail < rel_tol * total;
}

}  // namespace avgtrack
