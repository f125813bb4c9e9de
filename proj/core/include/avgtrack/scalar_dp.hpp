#pragma once

// One-dimensional Bellman oracle for scalar tracking problems, plus the
// piecewise closed-form value function and policy of the reference scalar
// example (A = 2, B = 1, C = 1, Q = R = 1, r_ss = 1), all in deviation
// coordinates.

#include "avgtrack/criteria.hpp"

#include <functional>
#include <vector>

namespace avgtrack {

/// Uniform grid on [x_min, x_max]; requires x_min < 0 < x_max and at least
/// 101 nodes.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, int n_points);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  int size() const { return n_points_; }
  double spacing() const { return (x_max_ - x_min_) / (n_points_ - 1); }
  double node(int i) const { return x_min_ + i * spacing(); }

  /// Linear interpolation of per-node values; x is clamped to the grid.
  double interpolate(const std::vector<double>& values, double x) const;

 private:
  double x_min_;
  double x_max_;
  int n_points_;
};

/// Which per-stage cost the Bellman operator charges.
///   Surrogate:         w x~^2 + r u~^2 + |s x~ + r_lin u~|
///   AbsoluteDeviation: |w x~^2 + r u~^2 + s x~ + r_lin u~|
enum class BellmanStage { Surrogate, AbsoluteDeviation };

struct ControlGrid {
  double u_min = -6.0;
  double u_max = 6.0;
  int n_controls = 6001;

  double spacing() const { return (u_max - u_min) / (n_controls - 1); }
};

struct ValueTable {
  Grid1D grid;
  std::vector<double> values;
  std::vector<double> policy;
  int sweeps = 0;
  double residual = 0.0;  // max node change of the last sweep

  double value_at(double x) const { return grid.interpolate(values, x); }
  double policy_at(double x) const { return grid.interpolate(policy, x); }
};

/// Deviation-coordinate stage cost of a scalar problem.
double scalar_stage(const StageContext& ctx, double x_dev, double u_dev, BellmanStage kind);

/// One synchronous Bellman update V_{j+1}(x) = min_u [stage(x, u) + V_j(Ax + Bu)]
/// over the control grid. Successors beyond the grid are clamped to the edge
/// and charged 1e6 per unit of overshoot. Ties go to the smaller |u|.
struct SweepResult {
  std::vector<double> values;
  std::vector<double> policy;
};
SweepResult bellman_sweep(const StageContext& ctx, const Grid1D& grid, const ControlGrid& controls,
                          const std::vector<double>& values, BellmanStage kind = BellmanStage::Surrogate);

/// Value iteration from V_0 = 0 until the max node change is <= tol.
/// Throws NoConvergence after max_sweeps and InvalidArgument unless the
/// problem is scalar (n = m = p = 1).
ValueTable value_iteration(const StageContext& ctx, const Grid1D& grid, const ControlGrid& controls,
                           double tol = 1e-9, int max_sweeps = 2000, BellmanStage kind = BellmanStage::Surrogate);

/// Piecewise closed-form value function of the reference scalar example.
double closed_form_value(double x_dev);

/// Piecewise closed-form optimal policy of the reference scalar example. At
/// |x~| = 0.809 the outer (LQR-like) branch applies.
double closed_form_policy(double x_dev);

/// | V(x~) - min_u [stage(x~, u) + V(A x~ + B u)] |, with the inner minimum
/// found by a dense scan of [u_lo, u_hi] (seeded with policy(x~)) and
/// golden-section refinement around the best scan point.
double bellman_residual(const std::function<double(double)>& value_fn, const std::function<double(double)>& policy_fn,
                        const StageContext& ctx, double x_dev, double u_lo, double u_hi,
                        BellmanStage kind = BellmanStage::Surrogate);

}  // namespace avgtrack
