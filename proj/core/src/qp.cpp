#include "avgtrack/qp.hpp"

#include "avgtrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace avgtrack {

namespace {

constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kTiny = 1e-30;

double norm_inf(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Infinity-norm residuals plus the magnitudes of the terms they cancel, so
// that tolerances scale with the data.
struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double primal_scale = 0.0;
  double dual_scale = 0.0;

  bool within(double tol) const { return primal <= tol * (1.0 + primal_scale) && dual <= tol * (1.0 + dual_scale); }
};

Residuals true_residuals(const QpProblem& qp, const Vector& z, const Vector& lambda, const Vector& mu) {
  Residuals r;
  const Vector hz = qp.H * z;
  Vector grad = hz + qp.g;
  r.dual_scale = std::max(norm_inf(hz), norm_inf(qp.g));
  if (qp.E.rows() > 0) {
    const Vector ez = qp.E * z;
    const Vector etl = qp.E.transpose() * lambda;
    r.primal = norm_inf(ez - qp.f);
    r.primal_scale = std::max(norm_inf(ez), norm_inf(qp.f));
    grad += etl;
    r.dual_scale = std::max(r.dual_scale, norm_inf(etl));
  }
  if (qp.G.rows() > 0) {
    const Vector gz = qp.G * z;
    const Vector gtm = qp.G.transpose() * mu;
    r.primal = std::max(r.primal, (gz - qp.h).cwiseMax(0.0).maxCoeff());
    r.primal_scale = std::max({r.primal_scale, norm_inf(gz), norm_inf(qp.h)});
    grad += gtm;
    r.dual_scale = std::max(r.dual_scale, norm_inf(gtm));
  }
  r.dual = norm_inf(grad);
  return r;
}

// Ruiz equilibration: diagonal variable scaling d, constraint row scaling e
// and a cost scale c, chosen so that the rows and columns of the scaled KKT
// matrix have unit infinity norm.
struct Scaling {
  Vector d;
  Vector e;
  double c = 1.0;
};

double clamp_norm(double v) { return v < 1e-4 ? 1.0 : std::clamp(v, 1e-4, 1e4); }

Scaling equilibrate(Matrix& h, Vector& g, Matrix& a, int passes) {
  const Eigen::Index n = h.rows();
  const Eigen::Index m = a.rows();
  Scaling sc{Vector::Ones(n), Vector::Ones(m), 1.0};
  for (int pass = 0; pass < passes; ++pass) {
    Vector dt(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double norm = h.col(j).cwiseAbs().maxCoeff();
      if (m > 0) norm = std::max(norm, a.col(j).cwiseAbs().maxCoeff());
      dt(j) = 1.0 / std::sqrt(clamp_norm(norm));
    }
    Vector et(m);
    for (Eigen::Index i = 0; i < m; ++i) et(i) = 1.0 / std::sqrt(clamp_norm(a.row(i).cwiseAbs().maxCoeff()));
    h = dt.asDiagonal() * h * dt.asDiagonal();
    a = et.asDiagonal() * a * dt.asDiagonal();
    g = g.cwiseProduct(dt);
    sc.d = sc.d.cwiseProduct(dt);
    sc.e = sc.e.cwiseProduct(et);

    const double mean_col = h.cwiseAbs().colwise().maxCoeff().mean();
    const double ct = 1.0 / clamp_norm(std::max(mean_col, norm_inf(g)));
    h *= ct;
    g *= ct;
    sc.c *= ct;
  }
  return sc;
}

// Iterates on the equilibrated problem; x(), lambda() and mu() report the
// unscaled primal and dual estimates.
class AdmmWorkspace {
 public:
  AdmmWorkspace(const QpProblem& qp, const QpSettings& settings)
      : qp_(qp), settings_(settings), n_eq_(qp.E.rows()), n_in_(qp.G.rows()) {
    const Eigen::Index n = qp.num_vars();
    const Eigen::Index m = n_eq_ + n_in_;
    h_ = qp.H;
    g_ = qp.g;
    a_.resize(m, n);
    if (n_eq_ > 0) a_.topRows(n_eq_) = qp.E;
    if (n_in_ > 0) a_.bottomRows(n_in_) = qp.G;
    scaling_ = equilibrate(h_, g_, a_, settings.scaling_passes);

    lower_ = Vector::Constant(m, -std::numeric_limits<double>::infinity());
    upper_.resize(m);
    if (n_eq_ > 0) {
      lower_.head(n_eq_) = qp.f.cwiseProduct(scaling_.e.head(n_eq_));
      upper_.head(n_eq_) = lower_.head(n_eq_);
    }
    if (n_in_ > 0) upper_.tail(n_in_) = qp.h.cwiseProduct(scaling_.e.tail(n_in_));

    x_ = Vector::Zero(n);
    z_ = Vector::Zero(m);
    y_ = Vector::Zero(m);
    set_rho(settings.rho);
  }

  void set_rho(double rho) {
    rho_ = std::clamp(rho, kRhoMin, kRhoMax);
    const Eigen::Index m = a_.rows();
    rho_vec_ = Vector::Constant(m, rho_);
    if (n_eq_ > 0) rho_vec_.head(n_eq_) *= settings_.equality_rho_scale;
    Matrix kkt = h_ + settings_.sigma * Matrix::Identity(qp_.num_vars(), qp_.num_vars());
    kkt.noalias() += a_.transpose() * rho_vec_.asDiagonal() * a_;
    llt_.compute(kkt);
    if (llt_.info() != Eigen::Success) {
      throw SolverFailure("solve_qp: regularized KKT system is not positive definite");
    }
  }

  void iterate() {
    const double alpha = settings_.alpha;
    const Vector rhs = settings_.sigma * x_ - g_ + a_.transpose() * (rho_vec_.cwiseProduct(z_) - y_);
    const Vector x_tilde = llt_.solve(rhs);
    const Vector z_tilde = a_ * x_tilde;
    x_ = alpha * x_tilde + (1.0 - alpha) * x_;
    const Vector relaxed = alpha * z_tilde + (1.0 - alpha) * z_;
    Vector z_next = relaxed + y_.cwiseQuotient(rho_vec_);
    z_next = z_next.cwiseMax(lower_).cwiseMin(upper_);
    y_ += rho_vec_.cwiseProduct(relaxed - z_next);
    z_ = std::move(z_next);
  }

  void adapt_rho() {
    const Vector ax = a_ * x_;
    const Vector hx = h_ * x_;
    const Vector aty = a_.transpose() * y_;
    const double prim = norm_inf(ax - z_) / std::max({norm_inf(ax), norm_inf(z_), kTiny});
    const double dual = norm_inf(hx + g_ + aty) / std::max({norm_inf(hx), norm_inf(aty), norm_inf(g_), kTiny});
    if (prim <= 0.0 || dual <= 0.0) return;
    const double proposed = std::clamp(rho_ * std::sqrt(prim / dual), kRhoMin, kRhoMax);
    if (proposed > 5.0 * rho_ || proposed < rho_ / 5.0) set_rho(proposed);
  }

  Vector lambda() const { return unscaled_y().head(n_eq_); }
  Vector mu() const { return unscaled_y().tail(n_in_).cwiseMax(0.0); }
  Vector x() const { return scaling_.d.cwiseProduct(x_); }

  /// Inequalities considered active: slack smaller than the multiplier.
  std::vector<Eigen::Index> active_set() const {
    std::vector<Eigen::Index> active;
    const Vector slack = qp_.h - qp_.G * x();
    const Vector y = unscaled_y();
    for (Eigen::Index i = 0; i < n_in_; ++i) {
      if (slack(i) < y(n_eq_ + i)) active.push_back(i);
    }
    return active;
  }

 private:
  Vector unscaled_y() const { return scaling_.e.cwiseProduct(y_) / scaling_.c; }

  const QpProblem& qp_;
  const QpSettings& settings_;
  Eigen::Index n_eq_;
  Eigen::Index n_in_;
  Scaling scaling_;
  Matrix h_;
  Vector g_;
  Matrix a_;
  Vector lower_;
  Vector upper_;
  Vector x_;
  Vector z_;
  Vector y_;
  Vector rho_vec_;
  double rho_ = 0.1;
  Eigen::LLT<Matrix> llt_;
};

struct Polished {
  Vector z;
  Vector lambda;
  Vector mu;
  Residuals residuals;
  double min_mu = 0.0;
};

// Solves the equality-constrained KKT system for a guessed active set. The
// minimum-norm solution handles duplicated active rows.
Polished solve_active(const QpProblem& qp, const std::vector<Eigen::Index>& active) {
  const Eigen::Index n = qp.num_vars();
  const Eigen::Index n_eq = qp.E.rows();
  const Eigen::Index n_act = static_cast<Eigen::Index>(active.size());
  const Eigen::Index dim = n + n_eq + n_act;

  Matrix kkt = Matrix::Zero(dim, dim);
  Vector rhs = Vector::Zero(dim);
  kkt.topLeftCorner(n, n) = qp.H;
  rhs.head(n) = -qp.g;
  if (n_eq > 0) {
    kkt.block(n, 0, n_eq, n) = qp.E;
    kkt.block(0, n, n, n_eq) = qp.E.transpose();
    rhs.segment(n, n_eq) = qp.f;
  }
  for (Eigen::Index k = 0; k < n_act; ++k) {
    const Eigen::Index row = active[static_cast<std::size_t>(k)];
    kkt.block(n + n_eq + k, 0, 1, n) = qp.G.row(row);
    kkt.block(0, n + n_eq + k, n, 1) = qp.G.row(row).transpose();
    rhs(n + n_eq + k) = qp.h(row);
  }

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(kkt);
  Vector sol = cod.solve(rhs);
  // One round of iterative refinement.
  sol += cod.solve(rhs - kkt * sol);

  Polished out;
  out.z = sol.head(n);
  out.lambda = sol.segment(n, n_eq);
  out.mu = Vector::Zero(qp.G.rows());
  out.min_mu = 0.0;
  for (Eigen::Index k = 0; k < n_act; ++k) {
    const double value = sol(n + n_eq + k);
    out.min_mu = std::min(out.min_mu, value);
    out.mu(active[static_cast<std::size_t>(k)]) = value;
  }
  out.residuals = true_residuals(qp, out.z, out.lambda, out.mu);
  return out;
}

// Starting from the ADMM guess, repeatedly drops the active row with the most
// negative multiplier or adds the most violated inactive row, up to
// max_steps re-solves. Returns the last KKT solution tried.
Polished polish(const QpProblem& qp, std::vector<Eigen::Index> active, double tol, int max_steps) {
  Polished p = solve_active(qp, active);
  for (int step = 0; step < max_steps; ++step) {
    if (p.min_mu < -tol) {
      const auto worst = std::min_element(active.begin(), active.end(),
                                          [&](Eigen::Index a, Eigen::Index b) { return p.mu(a) < p.mu(b); });
      active.erase(worst);
    } else if (qp.G.rows() > 0) {
      const Vector gap = qp.G * p.z - qp.h;
      Eigen::Index row = -1;
      double violation = tol;
      for (Eigen::Index i = 0; i < gap.size(); ++i) {
        if (gap(i) > violation && std::find(active.begin(), active.end(), i) == active.end()) {
          violation = gap(i);
          row = i;
        }
      }
      if (row < 0) break;
      active.insert(std::upper_bound(active.begin(), active.end(), row), row);
    } else {
      break;
    }
    p = solve_active(qp, active);
  }
  return p;
}

QpSolution finish(const QpProblem& qp, Vector z, Vector lambda, Vector mu, int iterations, bool polished,
                  double tol) {
  QpSolution sol;
  const Residuals r = true_residuals(qp, z, lambda, mu);
  sol.objective = qp.objective(z);
  sol.z = std::move(z);
  sol.lambda = std::move(lambda);
  sol.mu = std::move(mu);
  sol.primal_residual = r.primal;
  sol.dual_residual = r.dual;
  sol.iterations = iterations;
  sol.polished = polished;
  sol.status = r.within(tol) ? QpStatus::Solved : QpStatus::MaxIters;
  return sol;
}

}  // namespace

void validate(const QpProblem& qp) {
  const Eigen::Index n = qp.H.rows();
  if (n == 0 || qp.H.cols() != n) throw DimensionMismatch("QP: H must be square and non-empty");
  if (qp.g.size() != n) throw DimensionMismatch("QP: g must have one entry per variable");
  if (qp.E.rows() > 0 && qp.E.cols() != n) throw DimensionMismatch("QP: E column count differs from H");
  if (qp.G.rows() > 0 && qp.G.cols() != n) throw DimensionMismatch("QP: G column count differs from H");
  if (qp.f.size() != qp.E.rows()) throw DimensionMismatch("QP: f must have one entry per row of E");
  if (qp.h.size() != qp.G.rows()) throw DimensionMismatch("QP: h must have one entry per row of G");
  if (!is_symmetric(qp.H, 1e-8)) throw InvalidArgument("QP: H is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(qp.H, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-8) throw InvalidArgument("QP: H is not positive semidefinite");
}

QpSolution solve_qp(const QpProblem& qp, double tol, int max_iters) {
  QpSettings settings;
  settings.tol = tol;
  settings.max_iters = max_iters;
  return solve_qp(qp, settings);
}

QpSolution solve_qp(const QpProblem& qp, const QpSettings& settings) {
  validate(qp);
  if (!(settings.tol > 0.0) || settings.max_iters < 1) {
    throw InvalidArgument("solve_qp: tol must be positive and max_iters >= 1");
  }

  AdmmWorkspace ws(qp, settings);
  std::vector<Eigen::Index> last_active;
  std::vector<Eigen::Index> last_polished;
  bool tried_polish = false;

  int it = 1;
  for (; it <= settings.max_iters; ++it) {
    ws.iterate();

    if (it % settings.check_every == 0) {
      const Vector lambda = ws.lambda();
      const Vector mu = ws.mu();
      const Residuals r = true_residuals(qp, ws.x(), lambda, mu);
      if (r.within(settings.tol)) {
        return finish(qp, ws.x(), lambda, mu, it, false, settings.tol);
      }

      if (settings.polish) {
        std::vector<Eigen::Index> active = ws.active_set();
        const bool stable = active == last_active;
        last_active = active;
        if (stable && (!tried_polish || active != last_polished)) {
          tried_polish = true;
          last_polished = active;
          const Polished p = polish(qp, active, settings.tol, settings.polish_steps);
          if (p.residuals.within(settings.tol) && p.min_mu >= -settings.tol) {
            return finish(qp, p.z, p.lambda, p.mu.cwiseMax(0.0), it, true, settings.tol);
          }
        }
      }
    }

    if (settings.adapt_every > 0 && it % settings.adapt_every == 0) ws.adapt_rho();
  }
  return finish(qp, ws.x(), ws.lambda(), ws.mu(), settings.max_iters, false, settings.tol);
}

double KktReport::worst() const {
  return std::max({stationarity, equality_violation, inequality_violation, -min_multiplier, complementarity});
}

KktReport kkt_report(const QpProblem& qp, const QpSolution& sol) {
  KktReport rep;
  Vector grad = qp.H * sol.z + qp.g;
  if (qp.E.rows() > 0) {
    grad += qp.E.transpose() * sol.lambda;
    rep.equality_violation = norm_inf(qp.E * sol.z - qp.f);
  }
  if (qp.G.rows() > 0) {
    grad += qp.G.transpose() * sol.mu;
    const Vector gap = qp.G * sol.z - qp.h;
    rep.inequality_violation = gap.cwiseMax(0.0).maxCoeff();
    rep.min_multiplier = std::min(0.0, sol.mu.minCoeff());
    rep.complementarity = sol.mu.cwiseProduct(gap).cwiseAbs().maxCoeff();
  }
  rep.stationarity = norm_inf(grad);
  return rep;
}

}  // namespace avgtrack
