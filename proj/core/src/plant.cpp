#include "avgtrack/plant.hpp"

#include "avgtrack/errors.hpp"

#include <string>
#include <utility>

namespace avgtrack {

namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require_size(const Vector& v, Eigen::Index expected, const char* what) {
  if (v.size() != expected) {
    throw DimensionMismatch(std::string(what) + " has dimension " + std::to_string(v.size()) + ", expected " +
                            std::to_string(expected));
  }
}

Matrix observability_matrix(const Matrix& a, const Matrix& c) {
  const Eigen::Index n = a.rows();
  Matrix obs(c.rows() * n, n);
  Matrix block = c;
  for (Eigen::Index k = 0; k < n; ++k) {
    obs.middleRows(k * c.rows(), c.rows()) = block;
    block = block * a;
  }
  return obs;
}

}  // namespace

LinearSystem::LinearSystem(Matrix a, Matrix b, Matrix c) : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  if (a_.rows() == 0 || a_.rows() != a_.cols()) {
    throw DimensionMismatch("A must be square and non-empty, got " + shape(a_));
  }
  if (b_.rows() != a_.rows() || b_.cols() == 0) {
    throw DimensionMismatch("B must have " + std::to_string(a_.rows()) + " rows, got " + shape(b_));
  }
  if (c_.cols() != a_.rows() || c_.rows() == 0) {
    throw DimensionMismatch("C must have " + std::to_string(a_.rows()) + " columns, got " + shape(c_));
  }
  require_finite(a_, "A");
  require_finite(b_, "B");
  require_finite(c_, "C");
}

Vector LinearSystem::step(const Vector& x, const Vector& u) const { return a_ * x + b_ * u; }

TrackingProblem::TrackingProblem(LinearSystem system, Matrix q, Matrix r, Vector r_ss)
    : system_(std::move(system)), q_(std::move(q)), r_(std::move(r)), r_ss_(std::move(r_ss)) {
  if (q_.rows() != system_.p() || q_.cols() != system_.p()) {
    throw DimensionMismatch("Q must be " + std::to_string(system_.p()) + "x" + std::to_string(system_.p()) +
                            ", got " + shape(q_));
  }
  if (r_.rows() != system_.m() || r_.cols() != system_.m()) {
    throw DimensionMismatch("R must be " + std::to_string(system_.m()) + "x" + std::to_string(system_.m()) +
                            ", got " + shape(r_));
  }
  require_size(r_ss_, system_.p(), "r_ss");
  require_finite(q_, "Q");
  require_finite(r_, "R");
  require_finite(r_ss_, "r_ss");
  // Positive definiteness is established by factorization.
  cholesky(q_);
  cholesky(r_);
}

Matrix TrackingProblem::state_weight() const {
  const Matrix& c = system_.C();
  return c.transpose() * q_ * c;
}

bool check_controllable(const LinearSystem& sys) {
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  Matrix kalman(n, n * m);
  Matrix block = sys.B();
  for (Eigen::Index k = 0; k < n; ++k) {
    kalman.middleCols(k * m, m) = block;
    block = sys.A() * block;
  }
  return rank(kalman, 1e-9) == n;
}

bool check_observable(const LinearSystem& sys, const Matrix& q) {
  const Matrix l = cholesky(q);
  const Matrix weighted_c = l.transpose() * sys.C();
  return rank(observability_matrix(sys.A(), weighted_c), 1e-9) == sys.n();
}

SteadyState steady_state(const TrackingProblem& prob, Convention convention) {
  const LinearSystem& sys = prob.system();
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  const Eigen::Index p = sys.p();
  if (p != m) {
    throw DimensionMismatch("steady_state requires as many outputs as inputs (p = " + std::to_string(p) +
                            ", m = " + std::to_string(m) + ")");
  }

  Matrix block = Matrix::Zero(n + p, n + m);
  block.topLeftCorner(n, n) = sys.A() - Matrix::Identity(n, n);
  block.topRightCorner(n, m) = sys.B();
  block.bottomLeftCorner(p, n) = sys.C();
  Vector rhs = Vector::Zero(n + p);
  rhs.tail(p) = prob.reference();

  Vector solution;
  try {
    solution = solve_linear(block, rhs);
  } catch (const SingularMatrix& e) {
    throw AssumptionTwoViolated(std::string("steady-state block matrix [[A - I, B], [C, 0]] is singular: ") +
                                e.what());
  }

  SteadyState ss;
  ss.x_ss = solution.head(n);
  ss.u_ss = solution.tail(m);
  ss.convention = convention;
  const Matrix w = prob.state_weight();
  const double factor = convention == Convention::ExactExpansion ? 2.0 : 1.0;
  ss.s = factor * (w * ss.x_ss);
  ss.r_lin = factor * (prob.R() * ss.u_ss);
  ss.C_ss = ss.x_ss.dot(w * ss.x_ss) + ss.u_ss.dot(prob.R() * ss.u_ss);
  return ss;
}

DeviationPair to_deviation(const Vector& x, const Vector& u, const SteadyState& ss) {
  require_size(x, ss.x_ss.size(), "state");
  require_size(u, ss.u_ss.size(), "input");
  return {x - ss.x_ss, u - ss.u_ss};
}

Vector state_deviation(const Vector& x, const SteadyState& ss) {
  require_size(x, ss.x_ss.size(), "state");
  return x - ss.x_ss;
}

Vector from_deviation(const Vector& u_dev, const SteadyState& ss) {
  require_size(u_dev, ss.u_ss.size(), "input deviation");
  return u_dev + ss.u_ss;
}

}  // namespace avgtrack
