#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace blockstep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ThinQr {
  Matrix q;  // m x n, orthonormal columns
  Matrix r;  // n x n, upper triangular with positive diagonal
};

/// Relative cutoff on singular values defining numerical rank.
inline constexpr double kRankTol = 1e-10;

/// tol * max(1, scale); the tolerance convention used throughout.
inline double hybrid_tol(double tol, double scale) { return tol * (scale > 1.0 ? scale : 1.0); }

/// Max-abs-row-sum norm.
double norm_inf(const Matrix& a);

/// Householder QR of a tall matrix with full column rank. Throws
/// RankDeficient when a diagonal entry of R drops below 1e-12 * ||A||.
ThinQr qr_thin(const Matrix& a);

/// Eigenvalues of a symmetric matrix, descending.
Vector sym_eigvals(const Matrix& s);

/// Eigenvalues of a Gram (PSD) matrix; values down to -1e-10 are clamped to 0.
Vector gram_eigvals(const Matrix& s);

/// Singular values, descending.
Vector singular_values(const Matrix& a);

/// Number of singular values above kRankTol * sigma_max.
std::size_t numerical_rank(const Vector& sigma_desc);

/// Solves R x = b for upper-triangular R. Throws Singular on a zero diagonal.
Vector back_substitute(const Matrix& r, const Vector& b);

/// det(zI - M) by complex LU with partial pivoting.
std::complex<double> charpoly_eval(const Matrix& m, std::complex<double> z);

}  // namespace blockstep
