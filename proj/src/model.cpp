#include "blockstep/model.hpp"

#include <cmath>
#include <limits>

#include "blockstep/error.hpp"

namespace blockstep {

ValidationOutcome validate(const Matrix& a1, const Matrix& a2, const Vector& y) {
  if (a1.rows() != a2.rows() || a1.rows() != y.size()) {
    throw Error(ErrorCode::BadShape, "A1, A2 and y must have the same number of rows");
  }
  if (a1.cols() == 0 || a2.cols() == 0) throw Error(ErrorCode::BadShape, "empty block");
  if (!a1.allFinite() || !a2.allFinite() || !y.allFinite()) {
    throw Error(ErrorCode::BadShape, "non-finite entries");
  }

  ValidationOutcome out;
  const auto n1 = a1.cols();
  const auto n2 = a2.cols();
  out.gram_dev1 = norm_inf(a1.transpose() * a1 - Matrix::Identity(n1, n1));
  out.gram_dev2 = norm_inf(a2.transpose() * a2 - Matrix::Identity(n2, n2));

  const Matrix c = a2.transpose() * a1;
  out.sigma_c = singular_values(c);
  out.r = numerical_rank(out.sigma_c);
  out.cross_nonzero = out.sigma_c.size() > 0 && out.sigma_c(0) > 0.0 && out.r > 0;
  out.lambdas_cc = out.sigma_c.head(static_cast<Eigen::Index>(out.r)).array().square();

  Matrix a(a1.rows(), n1 + n2);
  a << a1, a2;
  if (a.rows() >= a.cols()) {
    const Vector ev = gram_eigvals(a.transpose() * a);
    out.ata_max = ev(0);
    out.ata_min = ev(ev.size() - 1);
    out.full_column_rank = out.ata_min > 1e-12 * out.ata_max;
  }
  out.kappa = out.ata_min > 0.0 ? out.ata_max / out.ata_min : std::numeric_limits<double>::infinity();
  out.assumes_bwo = out.full_column_rank && out.cross_nonzero && out.gram_dev1 <= kBwoTol &&
                    out.gram_dev2 <= kBwoTol;
  return out;
}

Vector least_squares_solution(const Matrix& a, const Vector& y) {
  if (a.rows() != y.size()) throw Error(ErrorCode::BadShape, "A and y row mismatch");
  const ThinQr qr = qr_thin(a);
  return back_substitute(qr.r, qr.q.transpose() * y);
}

BlockProblem BlockProblem::create(Matrix a1, Matrix a2, Vector y, std::optional<std::uint64_t> seed) {
  BlockProblem p;
  p.validation_ = validate(a1, a2, y);
  if (!p.validation_.full_column_rank) {
    throw Error(ErrorCode::RankDeficient, "[A1 A2] must have full column rank");
  }
  p.a1_ = std::move(a1);
  p.a2_ = std::move(a2);
  p.y_ = std::move(y);
  p.seed_ = seed;
  const Matrix a = p.a();
  p.c_ = p.a2_.transpose() * p.a1_;
  p.gram_ = a.transpose() * a;
  p.aty_ = a.transpose() * p.y_;
  p.xstar_ = least_squares_solution(a, p.y_);
  return p;
}

Matrix BlockProblem::a() const {
  Matrix a(a1_.rows(), a1_.cols() + a2_.cols());
  a << a1_, a2_;
  return a;
}

double BlockProblem::lambda1() const {
  return validation_.lambdas_cc.size() > 0 ? validation_.lambdas_cc(0) : 0.0;
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::GD: return "gd";
    case Method::HB: return "hb";
    case Method::BGD: return "bgd";
    case Method::BEM: return "bem";
    case Method::AP: return "ap";
    case Method::DR: return "dr";
    case Method::RAP: return "rap";
    case Method::PRAP: return "prap";
    case Method::GDR: return "gdr";
    case Method::GAP: return "gap";
    case Method::GAPXX: return "gapxx";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  for (Method m : {Method::GD, Method::HB, Method::BGD, Method::BEM, Method::AP, Method::DR,
                   Method::RAP, Method::PRAP, Method::GDR, Method::GAP, Method::GAPXX}) {
    if (to_string(m) == s) return m;
  }
  throw Error(ErrorCode::Parse, "unknown method '" + std::string(s) + "'");
}

}  // namespace blockstep
