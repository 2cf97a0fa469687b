#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "blockstep/model.hpp"

namespace blockstep {

/// Gradient descent x+ = x - gamma (A'A x - A'y).
SolverTrace run_gd(const BlockProblem& problem, double gamma, std::size_t iters,
                   const std::optional<Vector>& x0 = std::nullopt);

/// Heavy ball x++ = x+ - alpha grad(x+) + beta (x+ - x), with x^{-1} = x^0.
SolverTrace run_hb(const BlockProblem& problem, double alpha, double beta, std::size_t iters,
                   const std::optional<Vector>& x0 = std::nullopt);

/// Cyclic two-block gradient descent; block 2 sees the updated block 1.
SolverTrace run_bgd(const BlockProblem& problem, double gamma1, double gamma2, std::size_t iters,
                    const std::optional<Vector>& x0 = std::nullopt);

/// Block exact minimization, i.e. BGD with unit stepsizes. Requires
/// block-wise orthogonality (throws NotBWO otherwise).
SolverTrace run_bem(const BlockProblem& problem, std::size_t iters,
                    const std::optional<Vector>& x0 = std::nullopt);

/// One BGD sweep applied to x; exposed for error-recurrence checks.
Vector bgd_step(const BlockProblem& problem, double gamma1, double gamma2, const Vector& x);

struct BlockQrSolution {
  Vector x;
  SolverTrace trace;  // errors of the inner orthonormal-block iterates
  double gamma1 = 0.0, gamma2 = 0.0, predicted_rho = 0.0;
};

/// QR-factor each block, run optimally-stepped BGD on the orthonormal
/// factors, and map back with the triangular factors.
BlockQrSolution solve_via_block_qr(const Matrix& a1, const Matrix& a2, const Vector& y,
                                   std::size_t iters);

struct RateEstimate {
  double rho_hat = 0.0;
  std::size_t window_begin = 0;  // first error index of the window
  std::size_t window_end = 0;    // last error index of the window
  double residual = 0.0;         // rms deviation of log-ratios from log(rho_hat)
  bool diverging = false;
};

inline constexpr std::size_t kMinTraceLength = 40;
inline constexpr double kConvergedFloor = 1e-13;

/// Number of leading iterates before a trace reaches its rounding floor:
/// the first drop below kConvergedFloor * e0, or the start of a stall once
/// the run has converged deeply. Zero for an empty or zero-start trace.
std::size_t pre_floor_length(std::span<const double> errors);

/// Geometric mean of consecutive error ratios over the final
/// `window_fraction` of the usable part of a trace. The usable part ends
/// before the first error below 1e-13 * error_0, and before a detected
/// rounding floor when the trace stalls after deep convergence.
RateEstimate asymptotic_rate(std::span<const double> errors, double window_fraction = 0.25);

}  // namespace blockstep
