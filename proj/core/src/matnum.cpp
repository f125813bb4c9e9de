#include "avgtrack/matnum.hpp"

#include "avgtrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace avgtrack {

namespace {

constexpr double kPivotThreshold = 1e-12;
constexpr double kSymmetryTol = 1e-10;

void require_square(const Eigen::Ref<const Matrix>& m, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionMismatch(std::string(what) + ": expected a non-empty square matrix, got " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

// Eigenvalue magnitudes of the 2x2 block [[a, b], [c, d]].
double block_radius(double a, double b, double c, double d) {
  const double half_trace = 0.5 * (a + d);
  const double det = a * d - b * c;
  const double disc = half_trace * half_trace - det;
  if (disc < 0.0) {
    return std::sqrt(std::max(det, 0.0));
  }
  const double root = std::sqrt(disc);
  return std::max(std::abs(half_trace + root), std::abs(half_trace - root));
}

}  // namespace

Matrix make_matrix(Eigen::Index rows, Eigen::Index cols, std::span<const double> row_major) {
  if (rows < 1 || cols < 1) {
    throw InvalidArgument("matrix must have at least one row and one column");
  }
  if (static_cast<Eigen::Index>(row_major.size()) != rows * cols) {
    throw InvalidArgument("matrix entry count " + std::to_string(row_major.size()) + " does not match " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = row_major[static_cast<std::size_t>(i * cols + j)];
    }
  }
  require_finite(m, "matrix");
  return m;
}

void require_finite(const Eigen::Ref<const Matrix>& m, std::string_view what) {
  if (!m.allFinite()) {
    throw InvalidArgument(std::string(what) + " contains non-finite entries");
  }
}

bool is_symmetric(const Eigen::Ref<const Matrix>& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

double inf_norm(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

Vector solve_linear(const Eigen::Ref<const Matrix>& m, const Eigen::Ref<const Vector>& b) {
  require_square(m, "solve_linear");
  if (b.size() != m.rows()) {
    throw DimensionMismatch("solve_linear: right-hand side has " + std::to_string(b.size()) +
                            " entries, matrix has " + std::to_string(m.rows()) + " rows");
  }
  const Eigen::Index n = m.rows();
  Matrix lu = m;
  Vector rhs = b;
  Eigen::VectorXd row_scale = m.cwiseAbs().rowwise().maxCoeff();

  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index pivot = k;
    lu.col(k).tail(n - k).cwiseAbs().maxCoeff(&pivot);
    pivot += k;
    if (pivot != k) {
      lu.row(k).swap(lu.row(pivot));
      std::swap(rhs(k), rhs(pivot));
      std::swap(row_scale(k), row_scale(pivot));
    }
    const double p = lu(k, k);
    if (std::abs(p) < kPivotThreshold * row_scale(k) || p == 0.0) {
      throw SingularMatrix("solve_linear: pivot " + std::to_string(k) + " is numerically zero");
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double factor = lu(i, k) / p;
      lu(i, k) = factor;
      lu.row(i).tail(n - k - 1) -= factor * lu.row(k).tail(n - k - 1);
      rhs(i) -= factor * rhs(k);
    }
  }

  Vector z(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double acc = lu.row(i).tail(n - i - 1).dot(z.tail(n - i - 1));
    z(i) = (rhs(i) - acc) / lu(i, i);
  }
  return z;
}

Matrix cholesky(const Eigen::Ref<const Matrix>& m) {
  require_square(m, "cholesky");
  if (!is_symmetric(m, kSymmetryTol)) {
    throw InvalidArgument("cholesky: matrix is not symmetric within 1e-10");
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("cholesky: matrix is not positive definite");
  }
  Matrix l = llt.matrixL();
  if ((l.diagonal().array() <= 0.0).any()) {
    throw NotPositiveDefinite("cholesky: non-positive diagonal pivot");
  }
  return l;
}

int rank(const Eigen::Ref<const Matrix>& m, double tol) {
  if (!(tol > 0.0)) {
    throw InvalidArgument("rank: tolerance must be positive");
  }
  if (m.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  const Eigen::Index k = std::min(m.rows(), m.cols());
  const Vector diag = qr.matrixQR().diagonal().head(k).cwiseAbs();
  const double largest = diag.maxCoeff();
  if (largest == 0.0) return 0;
  return static_cast<int>((diag.array() > tol * largest).count());
}

double spectral_radius(const Eigen::Ref<const Matrix>& m, int max_iters, double tol) {
  require_square(m, "spectral_radius");
  if (max_iters < 1 || !(tol > 0.0)) {
    throw InvalidArgument("spectral_radius: max_iters must be >= 1 and tol > 0");
  }
  require_finite(m, "spectral_radius input");
  const Eigen::Index n = m.rows();
  if (n == 1) return std::abs(m(0, 0));

  // RealSchur reduces to upper Hessenberg form and then runs Francis
  // double-shift QR sweeps until the quasi-triangular form deflates.
  Eigen::RealSchur<Matrix> schur(n);
  schur.setMaxIterations(static_cast<Eigen::Index>(max_iters) * n);
  schur.compute(m, /*computeU=*/false);
  if (schur.info() != Eigen::Success) {
    throw NoConvergence("spectral_radius: shifted QR did not converge within " +
                        std::to_string(max_iters) + " sweeps per eigenvalue");
  }
  const Matrix& t = schur.matrixT();
  double radius = 0.0;
  for (Eigen::Index i = 0; i < n;) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      radius = std::max(radius, block_radius(t(i, i), t(i, i + 1), t(i + 1, i), t(i + 1, i + 1)));
      i += 2;
    } else {
      radius = std::max(radius, std::abs(t(i, i)));
      i += 1;
    }
  }
  return radius;
}

}  // namespace avgtrack
