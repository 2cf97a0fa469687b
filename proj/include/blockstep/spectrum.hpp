#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "blockstep/model.hpp"

namespace blockstep {

struct ComplexEig {
  double re = 0.0;
  double im = 0.0;
  std::size_t multiplicity = 1;
};

enum class SpectrumCase { Gamma1One, Gamma2One, Generic };

std::string_view to_string(SpectrumCase c) noexcept;

struct SpectrumReport {
  std::vector<ComplexEig> eigs;
  double rho = 0.0;
  SpectrumCase spectrum_case = SpectrumCase::Generic;
  std::size_t n1 = 0, n2 = 0, r = 0;

  std::size_t total_multiplicity() const;
  /// Multiplicity of the eigenvalue at (re, im), within the merge tolerance.
  std::size_t multiplicity_of(double re, double im = 0.0) const;
};

/// |gamma - 1| below this selects the gamma = 1 branches.
inline constexpr double kUnitGammaTol = 1e-12;
/// Eigenvalues closer than this are merged into one entry.
inline constexpr double kMergeTol = 1e-9;

/// Error propagation matrix of one BGD sweep in the general product form
/// (I - [0 0; g2 A2'A1 g2 A2'A2]) (I - [g1 A1'A1 g1 A1'A2; 0 0]).
Matrix build_m(const BlockProblem& problem, double gamma1, double gamma2);

/// Same matrix from the closed block form valid under block-wise
/// orthogonality: [(1-g1) I, -g1 C'; -g2 (1-g1) C, (1-g2) I + g1 g2 C C'].
Matrix build_m_block_form(const Matrix& c, double gamma1, double gamma2);

/// Exact spectrum of M(g1, g2) from the eigenvalues of C C'.
/// `lambdas` holds the r nonzero eigenvalues (descending, each in (0, 1)).
SpectrumReport closed_form_spectrum(std::span<const double> lambdas, std::size_t n1,
                                    std::size_t n2, double gamma1, double gamma2);

/// rho of the closed-form spectrum without materializing the report.
double spectral_radius(std::span<const double> lambdas, std::size_t n1, std::size_t n2,
                       double gamma1, double gamma2);

/// Larger root modulus of z^2 - (2 - g1 - g2 + g1 g2 lambda) z + (1-g1)(1-g2).
double quadratic_root_magnitudes(double gamma1, double gamma2, double lambda);

/// Larger root modulus of z^2 - b z + c for real b, c.
double max_root_modulus(double b, double c);

}  // namespace blockstep
