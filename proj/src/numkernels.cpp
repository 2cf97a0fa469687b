#include "blockstep/numkernels.hpp"

#include <cmath>

#include "blockstep/error.hpp"

namespace blockstep {

double norm_inf(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

ThinQr qr_thin(const Matrix& a) {
  const auto m = a.rows();
  const auto n = a.cols();
  if (m < n) throw Error(ErrorCode::BadShape, "qr_thin needs rows >= cols");
  Eigen::HouseholderQR<Matrix> qr(a);
  ThinQr out;
  out.r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  out.q = qr.householderQ() * Matrix::Identity(m, n);
  const double scale = norm_inf(a);
  const double tol = 1e-12 * scale;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(std::abs(out.r(j, j)) > tol)) {
      throw Error(ErrorCode::RankDeficient, "column " + std::to_string(j) + " is dependent");
    }
    if (out.r(j, j) < 0.0) {
      out.r.row(j) *= -1.0;
      out.q.col(j) *= -1.0;
    }
  }
  return out;
}

Vector sym_eigvals(const Matrix& s) {
  if (s.rows() != s.cols()) throw Error(ErrorCode::BadShape, "sym_eigvals needs a square matrix");
  if (s.size() == 0) return Vector();
  const double scale = s.cwiseAbs().maxCoeff();
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (asym > hybrid_tol(1e-10, scale)) {
    throw Error(ErrorCode::NotSymmetric, "asymmetry " + std::to_string(asym));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

Vector gram_eigvals(const Matrix& s) {
  Vector ev = sym_eigvals(s);
  for (auto& v : ev) {
    if (v < 0.0 && v >= -1e-10) v = 0.0;
  }
  return ev;
}

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector();
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

std::size_t numerical_rank(const Vector& sigma) {
  if (sigma.size() == 0) return 0;
  const double cutoff = kRankTol * sigma.maxCoeff();
  std::size_t r = 0;
  for (double s : sigma) {
    if (s > cutoff) ++r;
  }
  return r;
}

Vector back_substitute(const Matrix& r, const Vector& b) {
  const auto n = r.rows();
  if (r.cols() != n || b.size() != n) throw Error(ErrorCode::BadShape, "back_substitute size mismatch");
  Vector x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    if (r(i, i) == 0.0) throw Error(ErrorCode::Singular, "zero diagonal at " + std::to_string(i));
    double acc = b(i);
    for (Eigen::Index j = i + 1; j < n; ++j) acc -= r(i, j) * x(j);
    x(i) = acc / r(i, i);
  }
  return x;
}

std::complex<double> charpoly_eval(const Matrix& m, std::complex<double> z) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::BadShape, "charpoly_eval needs a square matrix");
  const auto n = m.rows();
  if (n == 0) return 1.0;
  Eigen::MatrixXcd zm = -m.cast<std::complex<double>>();
  zm.diagonal().array() += z;
  return Eigen::PartialPivLU<Eigen::MatrixXcd>(zm).determinant();
}

}  // namespace blockstep
