#include "blockstep/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "blockstep/error.hpp"

namespace blockstep {

std::string_view to_string(SpectrumCase c) noexcept {
  switch (c) {
    case SpectrumCase::Gamma1One: return "Gamma1One";
    case SpectrumCase::Gamma2One: return "Gamma2One";
    case SpectrumCase::Generic: return "Generic";
  }
  return "?";
}

std::size_t SpectrumReport::total_multiplicity() const {
  std::size_t total = 0;
  for (const auto& e : eigs) total += e.multiplicity;
  return total;
}

std::size_t SpectrumReport::multiplicity_of(double re, double im) const {
  std::size_t total = 0;
  for (const auto& e : eigs) {
    if (std::hypot(e.re - re, e.im - im) <= kMergeTol) total += e.multiplicity;
  }
  return total;
}

namespace {

void check_gamma(double g, const char* name) {
  if (!std::isfinite(g) || g < 0.0) {
    throw Error(ErrorCode::BadStepsize, std::string(name) + " must be a nonnegative finite number");
  }
}

void check_positive_gamma(double g, const char* name) {
  if (!std::isfinite(g) || g <= 0.0) {
    throw Error(ErrorCode::BadStepsize, std::string(name) + " must be positive");
  }
}

void check_lambdas(std::span<const double> lambdas, std::size_t n1, std::size_t n2) {
  if (lambdas.size() > std::min(n1, n2)) {
    throw Error(ErrorCode::BadShape, "rank exceeds min(n1, n2)");
  }
  for (double l : lambdas) {
    if (!(l > 0.0 && l < 1.0)) {
      throw Error(ErrorCode::OutOfRange, "eigenvalue of CC' outside (0, 1): " + std::to_string(l));
    }
  }
}

bool is_unit(double g) { return std::abs(g - 1.0) <= kUnitGammaTol; }

using Cplx = std::complex<double>;

// Roots of z^2 - b z + c = 0.
std::pair<Cplx, Cplx> quadratic_roots(double b, double c) {
  const double disc = b * b - 4.0 * c;
  if (std::abs(disc) <= 1e-14 * (b * b + 4.0 * std::abs(c))) return {Cplx(0.5 * b, 0.0), Cplx(0.5 * b, 0.0)};
  if (disc < 0.0) {
    const double im = 0.5 * std::sqrt(-disc);
    return {Cplx(0.5 * b, im), Cplx(0.5 * b, -im)};
  }
  const double sq = std::sqrt(disc);
  const double z1 = 0.5 * (b + std::copysign(sq, b));
  const double z2 = z1 != 0.0 ? c / z1 : 0.0;
  return {Cplx(z1, 0.0), Cplx(z2, 0.0)};
}

struct Pending {
  Cplx sum;
  Cplx rep;
  std::size_t mult;
};

void add(std::vector<Pending>& groups, Cplx z, std::size_t mult) {
  if (mult == 0) return;
  for (auto& g : groups) {
    if (std::abs(g.rep - z) <= kMergeTol) {
      g.sum += z * static_cast<double>(mult);
      g.mult += mult;
      return;
    }
  }
  groups.push_back({z * static_cast<double>(mult), z, mult});
}

}  // namespace

Matrix build_m(const BlockProblem& problem, double gamma1, double gamma2) {
  check_gamma(gamma1, "gamma1");
  check_gamma(gamma2, "gamma2");
  const auto n1 = static_cast<Eigen::Index>(problem.n1());
  const auto n2 = static_cast<Eigen::Index>(problem.n2());
  const auto n = n1 + n2;
  const Matrix& g = problem.gram();

  Matrix lower = Matrix::Identity(n, n);
  lower.block(n1, 0, n2, n1) -= gamma2 * g.block(n1, 0, n2, n1);
  lower.block(n1, n1, n2, n2) -= gamma2 * g.block(n1, n1, n2, n2);

  Matrix upper = Matrix::Identity(n, n);
  upper.block(0, 0, n1, n1) -= gamma1 * g.block(0, 0, n1, n1);
  upper.block(0, n1, n1, n2) -= gamma1 * g.block(0, n1, n1, n2);

  return lower * upper;
}

Matrix build_m_block_form(const Matrix& c, double gamma1, double gamma2) {
  check_gamma(gamma1, "gamma1");
  check_gamma(gamma2, "gamma2");
  const auto n2 = c.rows();
  const auto n1 = c.cols();
  Matrix m(n1 + n2, n1 + n2);
  m.topLeftCorner(n1, n1) = (1.0 - gamma1) * Matrix::Identity(n1, n1);
  m.topRightCorner(n1, n2) = -gamma1 * c.transpose();
  m.bottomLeftCorner(n2, n1) = -gamma2 * (1.0 - gamma1) * c;
  m.bottomRightCorner(n2, n2) =
      (1.0 - gamma2) * Matrix::Identity(n2, n2) + gamma1 * gamma2 * c * c.transpose();
  return m;
}

SpectrumReport closed_form_spectrum(std::span<const double> lambdas, std::size_t n1,
                                    std::size_t n2, double gamma1, double gamma2) {
  check_positive_gamma(gamma1, "gamma1");
  check_positive_gamma(gamma2, "gamma2");
  check_lambdas(lambdas, n1, n2);
  const std::size_t r = lambdas.size();

  SpectrumReport rep;
  rep.n1 = n1;
  rep.n2 = n2;
  rep.r = r;

  std::vector<Pending> groups;
  if (is_unit(gamma1)) {
    rep.spectrum_case = SpectrumCase::Gamma1One;
    add(groups, 0.0, n1);
    add(groups, 1.0 - gamma2, n2 - r);
    for (double l : lambdas) add(groups, 1.0 - gamma2 + gamma2 * l, 1);
  } else if (is_unit(gamma2)) {
    rep.spectrum_case = SpectrumCase::Gamma2One;
    add(groups, 0.0, n2);
    add(groups, 1.0 - gamma1, n1 - r);
    for (double l : lambdas) add(groups, 1.0 - gamma1 + gamma1 * l, 1);
  } else {
    rep.spectrum_case = SpectrumCase::Generic;
    add(groups, 1.0 - gamma1, n1 - r);
    add(groups, 1.0 - gamma2, n2 - r);
    const double c = (1.0 - gamma1) * (1.0 - gamma2);
    for (double l : lambdas) {
      const auto [z1, z2] = quadratic_roots(2.0 - gamma1 - gamma2 + gamma1 * gamma2 * l, c);
      add(groups, z1, 1);
      add(groups, z2, 1);
    }
  }

  for (const auto& g : groups) {
    const Cplx z = g.sum / static_cast<double>(g.mult);
    rep.eigs.push_back({z.real(), z.imag(), g.mult});
    rep.rho = std::max(rep.rho, std::abs(z));
  }
  std::stable_sort(rep.eigs.begin(), rep.eigs.end(), [](const ComplexEig& a, const ComplexEig& b) {
    return std::hypot(a.re, a.im) > std::hypot(b.re, b.im);
  });
  return rep;
}

double max_root_modulus(double b, double c) {
  const double disc = b * b - 4.0 * c;
  if (disc < 0.0) return std::sqrt(c);
  if (disc <= 1e-14 * (b * b + 4.0 * std::abs(c))) return c > 0.0 ? std::sqrt(c) : 0.5 * std::abs(b);  // double root
  return 0.5 * (std::abs(b) + std::sqrt(disc));
}

double quadratic_root_magnitudes(double gamma1, double gamma2, double lambda) {
  return max_root_modulus(2.0 - gamma1 - gamma2 + gamma1 * gamma2 * lambda,
                          (1.0 - gamma1) * (1.0 - gamma2));
}

double spectral_radius(std::span<const double> lambdas, std::size_t n1, std::size_t n2,
                       double gamma1, double gamma2) {
  check_positive_gamma(gamma1, "gamma1");
  check_positive_gamma(gamma2, "gamma2");
  check_lambdas(lambdas, n1, n2);
  const std::size_t r = lambdas.size();
  double rho = 0.0;
  if (is_unit(gamma1)) {
    if (n2 > r) rho = std::abs(1.0 - gamma2);
    for (double l : lambdas) rho = std::max(rho, std::abs(1.0 - gamma2 + gamma2 * l));
  } else if (is_unit(gamma2)) {
    if (n1 > r) rho = std::abs(1.0 - gamma1);
    for (double l : lambdas) rho = std::max(rho, std::abs(1.0 - gamma1 + gamma1 * l));
  } else {
    if (n1 > r) rho = std::abs(1.0 - gamma1);
    if (n2 > r) rho = std::max(rho, std::abs(1.0 - gamma2));
    for (double l : lambdas) rho = std::max(rho, quadratic_root_magnitudes(gamma1, gamma2, l));
  }
  return rho;
}

}  // namespace blockstep
