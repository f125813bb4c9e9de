#include "avgtrack/mpc.hpp"

#include "avgtrack/errors.hpp"

#include <string>

namespace avgtrack {

namespace {

void check_config(const MpcConfig& cfg) {
  if (cfg.horizon < 1 || cfg.rollout < 0) {
    throw InvalidArgument("MPC horizon must be >= 1 and rollout >= 0");
  }
  if (!(cfg.qp_tol > 0.0) || cfg.qp_max_iters < 1) {
    throw InvalidArgument("MPC qp_tol must be positive and qp_max_iters >= 1");
  }
}

}  // namespace

MpcLayout mpc_layout(const StageContext& ctx, const MpcConfig& cfg) {
  check_config(cfg);
  return MpcLayout{ctx.system().n(), ctx.system().m(), cfg.horizon, cfg.rollout};
}

QpProblem build_qp(const StageContext& ctx, const Matrix& k, const Vector& x_dev, const MpcConfig& cfg) {
  const MpcLayout lay = mpc_layout(ctx, cfg);
  const LinearSystem& sys = ctx.system();
  const Eigen::Index n = lay.n;
  const Eigen::Index m = lay.m;
  if (k.rows() != m || k.cols() != n) throw DimensionMismatch("build_qp: K must be m x n");
  if (x_dev.size() != n) throw DimensionMismatch("build_qp: initial deviation must have n entries");

  const int stages = lay.stages();
  const Eigen::Index nz = lay.num_vars();
  const Matrix& w = ctx.state_weight();
  const Matrix& r = ctx.problem().R();
  const Matrix& a = sys.A();
  const Matrix& b = sys.B();
  const Matrix a_cl = a - b * k;
  const Matrix w_rollout = w + k.transpose() * r * k;
  const Vector& s = ctx.steady().s;
  const Vector& r_lin = ctx.steady().r_lin;
  const Eigen::RowVectorXd rollout_row = s.transpose() - r_lin.transpose() * k;

  QpProblem qp;
  qp.H = Matrix::Zero(nz, nz);
  qp.g = Vector::Zero(nz);
  qp.E = Matrix::Zero(stages * n, nz);
  qp.f = Vector::Zero(stages * n);
  qp.G = Matrix::Zero(2 * stages, nz);
  qp.h = Vector::Zero(2 * stages);
  qp.constant = x_dev.dot(w * x_dev);

  for (int t = 0; t < stages; ++t) {
    const bool free_stage = t < lay.horizon;
    const Eigen::Index tau = lay.slack_offset(t);
    qp.g(tau) = 1.0;

    // Stage cost on x~_t (x~_0 is the constant above).
    if (t > 0) {
      const Eigen::Index xo = lay.state_offset(t);
      qp.H.block(xo, xo, n, n) = 2.0 * (free_stage ? w : w_rollout);
    }
    if (free_stage) {
      const Eigen::Index uo = lay.input_offset(t);
      qp.H.block(uo, uo, m, m) = 2.0 * r;
    }

    // Dynamics x~_{t+1} = A x~_t + B u~_t, or (A - BK) x~_t on rollout stages.
    const Eigen::Index row = t * n;
    qp.E.block(row, lay.state_offset(t + 1), n, n) = Matrix::Identity(n, n);
    const Matrix& a_stage = free_stage ? a : a_cl;
    if (t == 0) {
      qp.f.segment(row, n) = a_stage * x_dev;
    } else {
      qp.E.block(row, lay.state_offset(t), n, n) = -a_stage;
    }
    if (free_stage) qp.E.block(row, lay.input_offset(t), n, m) = -b;

    // tau_t >= +-(linear term), written as +-lin - tau <= 0.
    Eigen::RowVectorXd lin = Eigen::RowVectorXd::Zero(nz);
    double lin_const = 0.0;
    const Eigen::RowVectorXd state_row = free_stage ? Eigen::RowVectorXd(s.transpose()) : rollout_row;
    if (t == 0) {
      lin_const = state_row.dot(x_dev);
    } else {
      lin.segment(lay.state_offset(t), n) = state_row;
    }
    if (free_stage) lin.segment(lay.input_offset(t), m) = r_lin.transpose();

    qp.G.row(2 * t) = lin;
    qp.G(2 * t, tau) = -1.0;
    qp.h(2 * t) = -lin_const;
    qp.G.row(2 * t + 1) = -lin;
    qp.G(2 * t + 1, tau) = -1.0;
    qp.h(2 * t + 1) = lin_const;
  }
  return qp;
}

MpcPrediction reconstruct(const MpcLayout& lay, const Matrix& k, const Vector& x_dev, const Vector& z) {
  if (z.size() != lay.num_vars()) throw DimensionMismatch("reconstruct: decision vector has the wrong length");
  MpcPrediction pred;
  pred.states.push_back(x_dev);
  for (int t = 1; t <= lay.stages(); ++t) pred.states.push_back(z.segment(lay.state_offset(t), lay.n));
  for (int t = 0; t < lay.stages(); ++t) {
    if (t < lay.horizon) {
      pred.inputs.push_back(z.segment(lay.input_offset(t), lay.m));
    } else {
      pred.inputs.push_back(-k * pred.states[static_cast<std::size_t>(t)]);
    }
    pred.slacks.push_back(z(lay.slack_offset(t)));
  }
  return pred;
}

double prediction_cost(const StageContext& ctx, const MpcPrediction& pred) {
  double total = 0.0;
  for (std::size_t t = 0; t < pred.inputs.size(); ++t) {
    total += surrogate_stage(ctx, pred.states[t], pred.inputs[t]);
  }
  return total;
}

Controller mpc_controller(const StageContext& ctx, const Matrix& k, const MpcConfig& cfg) {
  check_config(cfg);
  if (k.rows() != ctx.system().m() || k.cols() != ctx.system().n()) {
    throw DimensionMismatch("mpc_controller: K must be m x n");
  }
  return Controller{"MPC", [ctx, k, cfg](const Vector& x) -> Vector {
                      const SteadyState& ss = ctx.steady();
                      const Vector x_dev = state_deviation(x, ss);
                      const QpProblem qp = build_qp(ctx, k, x_dev, cfg);
                      const QpSolution sol = solve_qp(qp, cfg.qp_tol, cfg.qp_max_iters);
                      if (sol.status != QpStatus::Solved) {
                        throw SolverFailure("MPC QP stopped after " + std::to_string(sol.iterations) +
                                            " iterations (primal residual " + std::to_string(sol.primal_residual) +
                                            ", dual residual " + std::to_string(sol.dual_residual) + ")");
                      }
                      return from_deviation(sol.z.head(ctx.system().m()), ss);
                    }};
}

}  // namespace avgtrack
