#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "blockstep/model.hpp"
#include "blockstep/solvers.hpp"

namespace blockstep {

/// Two subspaces H1, H2 of R^m described by orthonormal bases of their
/// orthogonal complements.
struct SubspacePair {
  Matrix a1;  // m x n1
  Matrix a2;  // m x n2
  std::vector<double> thetas;  // ascending nonzero principal angles, radians
  std::size_t r = 0;           // numerical rank of A2'A1

  static SubspacePair from_bases(Matrix a1, Matrix a2);
  std::size_t m() const { return static_cast<std::size_t>(a1.rows()); }
  std::size_t n1() const { return static_cast<std::size_t>(a1.cols()); }
  std::size_t n2() const { return static_cast<std::size_t>(a2.cols()); }
  bool full_rank() const;
};

std::vector<double> principal_angles(const Matrix& a1, const Matrix& a2);

enum class ProjKind { AP, DR, RAP, PRAP, GDR, GAP };

std::string_view to_string(ProjKind k) noexcept;

struct ProjParams {
  double gamma = 1.0;   // outer relaxation (RAP, GDR, GAP)
  double gamma1 = 1.0;  // PRAP, GAP
  double gamma2 = 1.0;  // GAP
};

struct ProjOperator {
  ProjKind kind = ProjKind::AP;
  ProjParams params;
  Matrix matrix;
};

/// Relaxed projection I - gamma A A' onto the subspace with complement basis A.
Matrix relaxed_projection(const Matrix& a, double gamma);

ProjOperator make_operator(const SubspacePair& pair, ProjKind kind, const ProjParams& params = {});

enum class SmallBlock { N1, N2, Equal };

struct GapStepsizes {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double rate = 0.0;
};

GapStepsizes gapxx_stepsizes(double theta1, double theta_r, bool full_rank, SmallBlock small);
GapStepsizes gapxx_stepsizes(const SubspacePair& pair);

struct RateTable {
  double ap, dr, rap, prap, gdr, gap, gapxx;
};

RateTable rate_table(double theta1, double theta_r);

/// Tabulated optimal parameters for each method on a pair (GAP++ uses gapxx_stepsizes).
ProjParams tabulated_params(const SubspacePair& pair, ProjKind kind, bool gapxx);

/// Orthogonal projector onto H1 ∩ H2 (the complement of range([A1 A2])).
Matrix intersection_projector(const SubspacePair& pair);

/// Iterates z <- T z; errors are ||z^t - P z0|| with P the intersection projector.
SolverTrace run_projection(const SubspacePair& pair, const ProjOperator& op, const Vector& z0,
                           std::size_t iters);

/// Coefficients c with z - P z = [A1 A2] c.
Vector off_intersection_coefficients(const SubspacePair& pair, const Vector& z);

/// Contraction of T on the off-intersection component, measured by power
/// iteration with renormalization so that neither underflow nor rounding
/// floors truncate the run.
RateEstimate measure_contraction(const SubspacePair& pair, const ProjOperator& op,
                                 const Vector& z0, std::size_t iters,
                                 double window_fraction = 0.25);

}  // namespace blockstep
