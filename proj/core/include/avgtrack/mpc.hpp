#pragma once

#include "avgtrack/criteria.hpp"
#include "avgtrack/qp.hpp"
#include "avgtrack/trajectory.hpp"

#include <vector>

namespace avgtrack {

struct MpcConfig {
  int horizon = 10;  // N: stages with free inputs
  int rollout = 30;  // L: terminal stages driven by u~ = -K x~
  double qp_tol = 1e-8;
  int qp_max_iters = 50000;
};

/// Index map of the decision vector
///   z = (u~_0 .. u~_{N-1}, x~_1 .. x~_{N+L}, tau_0 .. tau_{N+L-1}).
struct MpcLayout {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  int horizon = 0;
  int rollout = 0;

  int stages() const { return horizon + rollout; }
  Eigen::Index input_offset(int k) const { return k * m; }
  Eigen::Index state_offset(int k) const { return horizon * m + (k - 1) * n; }  // k >= 1
  Eigen::Index slack_offset(int k) const { return horizon * m + stages() * n + k; }
  Eigen::Index num_vars() const { return horizon * m + stages() * (n + 1); }
};

/// Predicted deviation trajectory recovered from a QP solution. Rollout-stage
/// inputs are -K x~_k.
struct MpcPrediction {
  std::vector<Vector> states;  // x~_0 .. x~_{N+L}
  std::vector<Vector> inputs;  // u~_0 .. u~_{N+L-1}
  std::vector<double> slacks;  // tau_0 .. tau_{N+L-1}
};

MpcLayout mpc_layout(const StageContext& ctx, const MpcConfig& cfg);

/// Slack reformulation of the receding-horizon program: the objective sums
/// x~^T C^T Q C x~ + u~^T R u~ + tau over N free stages and L LQR-rollout
/// stages, with tau_k >= +-(s^T x~_k + r_lin^T u~_k) and the deviation
/// dynamics as equality rows. x~_t enters as a constant.
QpProblem build_qp(const StageContext& ctx, const Matrix& k, const Vector& x_dev, const MpcConfig& cfg);

MpcPrediction reconstruct(const MpcLayout& layout, const Matrix& k, const Vector& x_dev, const Vector& z);

/// Surrogate cost of the prediction over stages 0 .. N+L-1.
double prediction_cost(const StageContext& ctx, const MpcPrediction& pred);

/// Receding-horizon controller x -> u~_0 + u_ss. The returned controller
/// throws SolverFailure if a QP stops at MaxIters.
Controller mpc_controller(const StageContext& ctx, const Matrix& k, const MpcConfig& cfg);

}  // namespace avgtrack
