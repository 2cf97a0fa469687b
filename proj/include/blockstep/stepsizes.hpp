#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "blockstep/model.hpp"

namespace blockstep {

struct ScalarOptimum {
  double gamma = 0.0;
  double rho = 0.0;
};

struct HbOptimum {
  double alpha = 0.0;
  double beta = 0.0;
  double rho = 0.0;
};

enum class BgdBranch { RankDeficient, FullRankEqual, FullRankN1, FullRankN2, RankOneZero };

std::string_view to_string(BgdBranch b) noexcept;

struct BgdOptimum {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double rho = 0.0;
  BgdBranch branch = BgdBranch::RankDeficient;
};

struct GridOptimum {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double rho = 0.0;
};

ScalarOptimum gd_optimal(double lambda_max, double lambda_min);
HbOptimum hb_optimal(double lambda_max, double lambda_min);

/// Optimal constant stepsizes for two-block BGD under block-wise
/// orthogonality. `lambdas` are the r nonzero eigenvalues of C C',
/// descending, all in (0, 1); r = lambdas.size().
BgdOptimum bgd_optimal(std::span<const double> lambdas, std::size_t n1, std::size_t n2);

/// min over gamma of max_i |1 - gamma xi_i| for descending positive xi.
ScalarOptimum minmax_stepsize(std::span<const double> xi);

/// Best gamma1 on the ray gamma2 = 1.
ScalarOptimum fixed_gamma2_one(std::span<const double> lambdas, std::size_t n1);

/// Best common stepsize on the ray gamma1 = gamma2.
ScalarOptimum equal_stepsizes(double lambda1);

/// Polyak's min-max over the companion quadratics z^2 - (beta + 1 - alpha zeta) z + beta.
HbOptimum heavyball_minmax(std::span<const double> zeta);

/// Exhaustive minimum of the closed-form spectral radius over the grid
/// {step, 2 step, ...}^2 clipped to [lo, hi] in each coordinate. Ties go to
/// the lexicographically smallest (gamma1, gamma2).
GridOptimum grid_search_min_rho(std::span<const double> lambdas, std::size_t n1, std::size_t n2,
                                double gamma_max = 4.0, double step = 0.005);
GridOptimum grid_search_region(std::span<const double> lambdas, std::size_t n1, std::size_t n2,
                               double lo1, double hi1, double lo2, double hi2, double step);

/// Spectral radius of I - gamma G for G with the given eigenvalues.
double gd_spectral_radius(std::span<const double> eigs, double gamma);
/// Spectral radius of the heavy-ball iteration matrix for G with the given eigenvalues.
double hb_spectral_radius(std::span<const double> eigs, double alpha, double beta);

/// Extreme eigenvalues of A'A. Under block-wise orthogonality these are
/// 1 +- sqrt(lambda1(C C')); otherwise they come from the Gram spectrum.
std::pair<double, double> gram_extremes(const BlockProblem& problem);

/// Optimal plan for GD, HB, BGD or BEM on a problem.
StepsizePlan optimal_plan(const BlockProblem& problem, Method method);

/// Predicted spectral radius of an arbitrary plan on a problem.
double predicted_rho(const BlockProblem& problem, const StepsizePlan& plan);

}  // namespace blockstep
