#include "blockstep/altproj.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "blockstep/error.hpp"

namespace blockstep {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kOrthoTol = 1e-10;

void check_orthonormal(const Matrix& a, const char* name) {
  const auto n = a.cols();
  const double dev = (a.transpose() * a - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (dev > kOrthoTol) {
    throw Error(ErrorCode::NotOrthonormal, std::string(name) + " deviates from orthonormal by " + std::to_string(dev));
  }
}

Matrix stacked(const SubspacePair& pair) {
  Matrix a(pair.a1.rows(), pair.a1.cols() + pair.a2.cols());
  a << pair.a1, pair.a2;
  return a;
}

}  // namespace

std::vector<double> principal_angles(const Matrix& a1, const Matrix& a2) {
  if (a1.rows() != a2.rows()) throw Error(ErrorCode::BadShape, "bases live in different spaces");
  check_orthonormal(a1, "A1");
  check_orthonormal(a2, "A2");
  const Vector sigma = singular_values(a2.transpose() * a1);
  std::vector<double> thetas;
  for (double s : sigma) {
    if (s >= 1.0 - 1e-12) continue;  // zero angle: shared direction
    thetas.push_back(std::acos(std::clamp(s, 0.0, 1.0)));
  }
  std::sort(thetas.begin(), thetas.end());
  return thetas;
}

SubspacePair SubspacePair::from_bases(Matrix a1, Matrix a2) {
  SubspacePair p;
  p.thetas = principal_angles(a1, a2);
  p.r = numerical_rank(singular_values(a2.transpose() * a1));
  p.a1 = std::move(a1);
  p.a2 = std::move(a2);
  return p;
}

bool SubspacePair::full_rank() const { return r == std::min(n1(), n2()); }

std::string_view to_string(ProjKind k) noexcept {
  switch (k) {
    case ProjKind::AP: return "ap";
    case ProjKind::DR: return "dr";
    case ProjKind::RAP: return "rap";
    case ProjKind::PRAP: return "prap";
    case ProjKind::GDR: return "gdr";
    case ProjKind::GAP: return "gap";
  }
  return "?";
}

Matrix relaxed_projection(const Matrix& a, double gamma) {
  const auto m = a.rows();
  return Matrix::Identity(m, m) - gamma * a * a.transpose();
}

ProjOperator make_operator(const SubspacePair& pair, ProjKind kind, const ProjParams& params) {
  const auto m = static_cast<Eigen::Index>(pair.m());
  const Matrix eye = Matrix::Identity(m, m);
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };

  ProjOperator op;
  op.kind = kind;
  op.params = params;
  switch (kind) {
    case ProjKind::AP:
      op.params = {};
      op.matrix = relaxed_projection(pair.a2, 1.0) * relaxed_projection(pair.a1, 1.0);
      break;
    case ProjKind::DR:
      op.params = {};
      op.matrix = 0.5 * eye + 0.5 * relaxed_projection(pair.a2, 2.0) * relaxed_projection(pair.a1, 2.0);
      break;
    case ProjKind::RAP:
      // The tabulated optimum 2 / (1 + sin^2 theta1) exceeds 1, so (0, 2) is admitted.
      if (!positive(params.gamma) || params.gamma >= 2.0) throw Error(ErrorCode::BadStepsize, "RAP needs gamma in (0, 2)");
      op.matrix = (1.0 - params.gamma) * eye +
                  params.gamma * relaxed_projection(pair.a2, 1.0) * relaxed_projection(pair.a1, 1.0);
      break;
    case ProjKind::PRAP:
      if (!positive(params.gamma1)) throw Error(ErrorCode::BadStepsize, "PRAP needs gamma1 > 0");
      op.matrix = relaxed_projection(pair.a2, 1.0) * relaxed_projection(pair.a1, params.gamma1);
      break;
    case ProjKind::GDR:
      if (!positive(params.gamma) || params.gamma > 1.0) throw Error(ErrorCode::BadStepsize, "GDR needs gamma in (0, 1]");
      op.matrix = (1.0 - params.gamma) * eye +
                  params.gamma * (0.5 * eye + 0.5 * relaxed_projection(pair.a2, 2.0) * relaxed_projection(pair.a1, 2.0));
      break;
    case ProjKind::GAP:
      if (!positive(params.gamma) || params.gamma > 1.0) throw Error(ErrorCode::BadStepsize, "GAP needs gamma in (0, 1]");
      if (!positive(params.gamma1) || !positive(params.gamma2)) {
        throw Error(ErrorCode::BadStepsize, "GAP needs gamma1, gamma2 > 0");
      }
      op.matrix = (1.0 - params.gamma) * eye + params.gamma * relaxed_projection(pair.a2, params.gamma2) *
                                                   relaxed_projection(pair.a1, params.gamma1);
      break;
  }
  return op;
}

GapStepsizes gapxx_stepsizes(double theta1, double theta_r, bool full_rank, SmallBlock small) {
  if (!(theta1 > 0.0 && theta1 <= theta_r && theta_r <= kHalfPi + 1e-12)) {
    throw Error(ErrorCode::OutOfRange, "need 0 < theta1 <= theta_r <= pi/2");
  }
  const double s1 = std::sin(theta1);
  const double sr = std::sin(std::min(theta_r, kHalfPi));
  GapStepsizes out;
  if (!full_rank) {
    out.gamma1 = out.gamma2 = 2.0 / (1.0 + s1);
    out.rate = (1.0 - s1) / (1.0 + s1);
    return out;
  }
  const double p = std::sqrt((1.0 + s1) * (1.0 + sr));
  const double q = std::sqrt((1.0 - s1) * (1.0 - sr));
  const double big = std::pow((p + q) / (sr + s1), 2);
  const double lesser = std::pow((p - q) / (sr + s1), 2);
  out.rate = std::max(0.0, (sr - s1) / (sr + s1));
  if (small == SmallBlock::N2) {
    out.gamma1 = lesser;
    out.gamma2 = big;
  } else {
    out.gamma1 = big;
    out.gamma2 = lesser;
  }
  return out;
}

GapStepsizes gapxx_stepsizes(const SubspacePair& pair) {
  if (pair.r == 0 || pair.thetas.size() < pair.r) {
    throw Error(ErrorCode::OutOfRange, "subspaces have no nonzero cosine between their complements");
  }
  const SmallBlock small = pair.n1() < pair.n2()   ? SmallBlock::N1
                           : pair.n2() < pair.n1() ? SmallBlock::N2
                                                   : SmallBlock::Equal;
  return gapxx_stepsizes(pair.thetas.front(), pair.thetas[pair.r - 1], pair.full_rank(), small);
}

RateTable rate_table(double theta1, double theta_r) {
  if (!(theta1 > 0.0 && theta1 <= theta_r && theta_r <= kHalfPi + 1e-12)) {
    throw Error(ErrorCode::OutOfRange, "need 0 < theta1 <= theta_r <= pi/2");
  }
  const double c1 = std::cos(theta1);
  const double s1 = std::sin(theta1);
  const double sr = std::sin(std::min(theta_r, kHalfPi));
  RateTable t{};
  t.ap = c1 * c1;
  t.dr = c1;
  t.rap = (1.0 - s1 * s1) / (1.0 + s1 * s1);
  t.prap = (sr * sr - s1 * s1) / (sr * sr + s1 * s1);
  t.gdr = c1;
  t.gap = (1.0 - s1) / (1.0 + s1);
  t.gapxx = (sr - s1) / (sr + s1);
  return t;
}

ProjParams tabulated_params(const SubspacePair& pair, ProjKind kind, bool gapxx) {
  if (pair.thetas.empty() || pair.r == 0) throw Error(ErrorCode::OutOfRange, "no nonzero principal angle");
  const double s1 = std::sin(pair.thetas.front());
  const double sr = std::sin(pair.thetas[pair.r - 1]);
  ProjParams p;
  switch (kind) {
    case ProjKind::AP:
    case ProjKind::DR:
    case ProjKind::GDR:
      break;
    case ProjKind::RAP:
      p.gamma = 2.0 / (1.0 + s1 * s1);
      break;
    case ProjKind::PRAP:
      p.gamma1 = 2.0 / (sr * sr + s1 * s1);
      break;
    case ProjKind::GAP:
      if (gapxx) {
        const auto g = gapxx_stepsizes(pair);
        p.gamma1 = g.gamma1;
        p.gamma2 = g.gamma2;
      } else {
        p.gamma1 = p.gamma2 = 2.0 / (1.0 + s1);
      }
      break;
  }
  return p;
}

Matrix intersection_projector(const SubspacePair& pair) {
  const auto m = static_cast<Eigen::Index>(pair.m());
  const ThinQr qr = qr_thin(stacked(pair));
  return Matrix::Identity(m, m) - qr.q * qr.q.transpose();
}

SolverTrace run_projection(const SubspacePair& pair, const ProjOperator& op, const Vector& z0, std::size_t iters) {
  if (z0.size() != static_cast<Eigen::Index>(pair.m())) throw Error(ErrorCode::BadShape, "z0 has wrong length");
  if (iters < 1) throw Error(ErrorCode::BadShape, "iters must be at least 1");
  const Vector target = intersection_projector(pair) * z0;

  SolverTrace trace;
  switch (op.kind) {
    case ProjKind::AP: trace.method = Method::AP; break;
    case ProjKind::DR: trace.method = Method::DR; break;
    case ProjKind::RAP: trace.method = Method::RAP; trace.gamma1 = op.params.gamma; break;
    case ProjKind::PRAP: trace.method = Method::PRAP; trace.gamma1 = op.params.gamma1; break;
    case ProjKind::GDR: trace.method = Method::GDR; trace.gamma1 = op.params.gamma; break;
    case ProjKind::GAP:
      trace.method = Method::GAP;
      trace.gamma1 = op.params.gamma1;
      trace.gamma2 = op.params.gamma2;
      break;
  }
  trace.errors.reserve(iters + 1);
  Vector z = z0;
  trace.errors.push_back((z - target).norm());
  for (std::size_t t = 0; t < iters; ++t) {
    z = op.matrix * z;
    trace.errors.push_back((z - target).norm());
  }
  trace.final_iterate = std::move(z);
  return trace;
}

Vector off_intersection_coefficients(const SubspacePair& pair, const Vector& z) {
  return least_squares_solution(stacked(pair), z);
}

RateEstimate measure_contraction(const SubspacePair& pair, const ProjOperator& op, const Vector& z0,
                                 std::size_t iters, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw Error(ErrorCode::BadShape, "window_fraction must lie in (0, 1]");
  }
  if (iters < kMinTraceLength) throw Error(ErrorCode::InsufficientTail, "too few iterations");
  const Matrix p = intersection_projector(pair);
  Vector d = z0 - p * z0;
  double norm = d.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::InsufficientTail, "z0 already lies in the intersection");
  d /= norm;

  std::vector<double> log_ratios;
  log_ratios.reserve(iters);
  for (std::size_t t = 0; t < iters; ++t) {
    Vector next = op.matrix * d;
    next -= p * next;  // T fixes the intersection; keep rounding from leaking into it
    norm = next.norm();
    if (!(norm > 0.0)) throw Error(ErrorCode::InsufficientTail, "iterate annihilated");
    log_ratios.push_back(std::log(norm));
    d = next / norm;
  }

  const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(window_fraction * static_cast<double>(iters)));
  RateEstimate est;
  est.window_begin = iters - w;
  est.window_end = iters;
  double sum = 0.0;
  for (std::size_t t = est.window_begin; t < iters; ++t) sum += log_ratios[t];
  const double mean = sum / static_cast<double>(w);
  double ss = 0.0;
  for (std::size_t t = est.window_begin; t < iters; ++t) ss += (log_ratios[t] - mean) * (log_ratios[t] - mean);
  est.rho_hat = std::exp(mean);
  est.residual = std::sqrt(ss / static_cast<double>(w));
  est.diverging = est.rho_hat >= 1.0;
  return est;
}

}  // namespace blockstep
