#include "avgtrack/scalar_dp.hpp"

#include "avgtrack/errors.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <cmath>
#include <numeric>
#include <string>

namespace avgtrack {

namespace {

constexpr double kOvershootPenalty = 1e6;
constexpr double kKLqrPrinted = 1.618;

struct ScalarCoefficients {
  double a, b, w, r, s, r_lin;
};

ScalarCoefficients scalar_coefficients(const StageContext& ctx) {
  const LinearSystem& sys = ctx.system();
  if (sys.n() != 1 || sys.m() != 1 || sys.p() != 1) {
    throw InvalidArgument("scalar dynamic programming requires n = m = p = 1");
  }
  return {sys.A()(0, 0),        sys.B()(0, 0), ctx.state_weight()(0, 0), ctx.problem().R()(0, 0),
          ctx.steady().s(0), ctx.steady().r_lin(0)};
}

inline double stage_value(const ScalarCoefficients& c, double x, double u, BellmanStage kind) {
  const double quad = c.w * x * x + c.r * u * u;
  const double lin = c.s * x + c.r_lin * u;
  return kind == BellmanStage::Surrogate ? quad + std::abs(lin) : std::abs(quad + lin);
}

double golden_section(const std::function<double(double)>& f, double lo, double hi, int iters) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return std::min({f(lo), f(hi), fc, fd});
}

}  // namespace

Grid1D::Grid1D(double x_min, double x_max, int n_points) : x_min_(x_min), x_max_(x_max), n_points_(n_points) {
  if (!(x_min < 0.0 && 0.0 < x_max)) {
    throw InvalidArgument("Grid1D requires x_min < 0 < x_max");
  }
  if (n_points < 101) {
    throw InvalidArgument("Grid1D requires at least 101 nodes, got " + std::to_string(n_points));
  }
}

double Grid1D::interpolate(const std::vector<double>& values, double x) const {
  const double h = spacing();
  const double pos = std::clamp((x - x_min_) / h, 0.0, static_cast<double>(n_points_ - 1));
  const int i = std::min(static_cast<int>(pos), n_points_ - 2);
  const double frac = pos - i;
  return values[static_cast<std::size_t>(i)] * (1.0 - frac) + values[static_cast<std::size_t>(i) + 1] * frac;
}

double scalar_stage(const StageContext& ctx, double x_dev, double u_dev, BellmanStage kind) {
  return stage_value(scalar_coefficients(ctx), x_dev, u_dev, kind);
}

SweepResult bellman_sweep(const StageContext& ctx, const Grid1D& grid, const ControlGrid& controls,
                          const std::vector<double>& values, BellmanStage kind) {
  const ScalarCoefficients c = scalar_coefficients(ctx);
  if (controls.n_controls < 2 || !(controls.u_min < controls.u_max)) {
    throw InvalidArgument("control grid needs u_min < u_max and at least two controls");
  }
  if (values.size() != static_cast<std::size_t>(grid.size())) {
    throw DimensionMismatch("value vector does not match the grid");
  }

  // Visit controls by increasing |u| so that strict improvement keeps the
  // smallest-magnitude minimizer.
  std::vector<double> u_sorted(static_cast<std::size_t>(controls.n_controls));
  for (int j = 0; j < controls.n_controls; ++j) {
    u_sorted[static_cast<std::size_t>(j)] = controls.u_min + j * controls.spacing();
  }
  std::stable_sort(u_sorted.begin(), u_sorted.end(), [](double l, double r) { return std::abs(l) < std::abs(r); });

  const double h = grid.spacing();
  const double lo = grid.x_min();
  const double hi = grid.x_max();
  const int last = grid.size() - 1;
  const double* v = values.data();

  SweepResult out;
  out.values.resize(values.size());
  out.policy.resize(values.size());
  for (int i = 0; i <= last; ++i) {
    const double x = grid.node(i);
    double best = std::numeric_limits<double>::infinity();
    double best_u = 0.0;
    for (const double u : u_sorted) {
      const double next = c.a * x + c.b * u;
      double future;
      if (next <= lo) {
        future = v[0] + kOvershootPenalty * (lo - next);
      } else if (next >= hi) {
        future = v[last] + kOvershootPenalty * (next - hi);
      } else {
        const double pos = (next - lo) / h;
        const int k = std::min(static_cast<int>(pos), last - 1);
        const double frac = pos - k;
        future = v[k] + frac * (v[k + 1] - v[k]);
      }
      const double total = stage_value(c, x, u, kind) + future;
      if (total < best) {
        best = total;
        best_u = u;
      }
    }
    out.values[static_cast<std::size_t>(i)] = best;
    out.policy[static_cast<std::size_t>(i)] = best_u;
  }
  return out;
}

ValueTable value_iteration(const StageContext& ctx, const Grid1D& grid, const ControlGrid& controls, double tol,
                           int max_sweeps, BellmanStage kind) {
  scalar_coefficients(ctx);
  if (!(tol > 0.0) || max_sweeps < 1) {
    throw InvalidArgument("value_iteration: tol must be positive and max_sweeps >= 1");
  }
  std::vector<double> values(static_cast<std::size_t>(grid.size()), 0.0);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    SweepResult next = bellman_sweep(ctx, grid, controls, values, kind);
    double change = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      change = std::max(change, std::abs(next.values[i] - values[i]));
    }
    values = std::move(next.values);
    if (change <= tol) {
      return ValueTable{grid, std::move(values), std::move(next.policy), sweep, change};
    }
  }
  throw NoConvergence("value_iteration: no convergence within " + std::to_string(max_sweeps) + " sweeps");
}

double closed_form_value(double x_dev) {
  const double ax = std::abs(x_dev);
  if (ax <= 0.5) return 5.0 * x_dev * x_dev + 3.0 * ax;
  if (ax < 0.809) return (26.0 * x_dev * x_dev + 22.0 * ax - 1.0) / 6.0;
  return 4.2361 * x_dev * x_dev + 4.236 * ax - 0.50003;
}

double closed_form_policy(double x_dev) {
  if (std::abs(x_dev) <= 0.5) return -2.0 * x_dev;
  if (x_dev > 0.5 && x_dev < 0.809) return (-10.0 * x_dev - 1.0) / 6.0;
  if (x_dev < -0.5 && x_dev > -0.809) return (-10.0 * x_dev + 1.0) / 6.0;
  if (x_dev >= 0.809) return -kKLqrPrinted * x_dev - 0.29;
  return -kKLqrPrinted * x_dev + 0.29;
}

double bellman_residual(const std::function<double(double)>& value_fn, const std::function<double(double)>& policy_fn,
                        const StageContext& ctx, double x_dev, double u_lo, double u_hi, BellmanStage kind) {
  const ScalarCoefficients c = scalar_coefficients(ctx);
  if (!(u_lo < u_hi)) throw InvalidArgument("bellman_residual: empty control range");

  const auto rhs = [&](double u) { return stage_value(c, x_dev, u, kind) + value_fn(c.a * x_dev + c.b * u); };

  constexpr int kScan = 20001;
  const double du = (u_hi - u_lo) / (kScan - 1);
  double best = std::numeric_limits<double>::infinity();
  double best_u = u_lo;
  for (int j = 0; j < kScan; ++j) {
    const double u = u_lo + j * du;
    const double val = rhs(u);
    if (val < best) {
      best = val;
      best_u = u;
    }
  }
  const double refined = golden_section(rhs, std::max(u_lo, best_u - du), std::min(u_hi, best_u + du), 80);
  best = std::min(best, refined);

  const double u_policy = policy_fn(x_dev);
  if (u_policy >= u_lo && u_policy <= u_hi) {
    best = std::min(best, rhs(u_policy));
    const double around = golden_section(rhs, std::max(u_lo, u_policy - du), std::min(u_hi, u_policy + du), 80);
    best = std::min(best, around);
  }
  return std::abs(value_fn(x_dev) - best);
}

}  // namespace avgtrack
