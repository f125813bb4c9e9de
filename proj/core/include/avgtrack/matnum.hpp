#pragma once

// Dense numerical kernel shared by every other module. Matrices and vectors
// are plain Eigen dynamic types; the functions here add the contracts the
// rest of the library relies on (pivot thresholds, rank tolerance, etc).

#include <Eigen/Dense>

#include <span>
#include <string_view>

namespace avgtrack {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Builds a rows x cols matrix from row-major entries. Throws
/// InvalidArgument on empty shapes, a wrong entry count, or non-finite entries.
Matrix make_matrix(Eigen::Index rows, Eigen::Index cols, std::span<const double> row_major);

/// Throws InvalidArgument naming `what` if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const Matrix>& m, std::string_view what);

bool is_symmetric(const Eigen::Ref<const Matrix>& m, double tol);

double inf_norm(const Eigen::Ref<const Matrix>& m);

/// Solves M z = b by LU with partial pivoting.
///
/// Throws SingularMatrix when a pivot falls below 1e-12 times the scale
/// (largest magnitude) of the row it came from, and DimensionMismatch when
/// shapes disagree.
Vector solve_linear(const Eigen::Ref<const Matrix>& m, const Eigen::Ref<const Vector>& b);

/// Lower-triangular Cholesky factor L with L L^T = M.
/// Throws InvalidArgument if M is not symmetric within 1e-10 and
/// NotPositiveDefinite if a diagonal pivot is not positive.
Matrix cholesky(const Eigen::Ref<const Matrix>& m);

/// Numerical rank: number of column-pivoted QR diagonal magnitudes larger than
/// tol times the largest one.
int rank(const Eigen::Ref<const Matrix>& m, double tol = 1e-9);

/// Largest eigenvalue magnitude via Hessenberg reduction and shifted QR sweeps
/// (real Schur form). Throws NoConvergence if the QR iteration does not
/// deflate within max_iters sweeps per eigenvalue.
double spectral_radius(const Eigen::Ref<const Matrix>& m, int max_iters = 1000, double tol = 1e-12);

}  // namespace avgtrack
