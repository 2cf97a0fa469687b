#include "blockstep/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "blockstep/error.hpp"
#include "blockstep/stepsizes.hpp"

namespace blockstep {

namespace {

using Clock = std::chrono::steady_clock;

void check_step(double g, const char* name) {
  if (!std::isfinite(g) || g <= 0.0) throw Error(ErrorCode::BadStepsize, std::string(name) + " must be positive");
}

void check_iters(std::size_t iters) {
  if (iters < 1) throw Error(ErrorCode::BadShape, "iters must be at least 1");
}

Vector start_point(const BlockProblem& p, const std::optional<Vector>& x0) {
  if (!x0) return Vector::Zero(static_cast<Eigen::Index>(p.n()));
  if (x0->size() != static_cast<Eigen::Index>(p.n())) throw Error(ErrorCode::BadShape, "x0 has wrong length");
  return *x0;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

SolverTrace run_gd(const BlockProblem& problem, double gamma, std::size_t iters,
                   const std::optional<Vector>& x0) {
  check_step(gamma, "gamma");
  check_iters(iters);
  const auto t0 = Clock::now();
  const Matrix& g = problem.gram();
  const Vector& b = problem.aty();
  const Vector& xs = problem.xstar();

  SolverTrace trace;
  trace.method = Method::GD;
  trace.gamma1 = gamma;
  trace.seed = problem.seed();
  trace.errors.reserve(iters + 1);

  Vector x = start_point(problem, x0);
  Vector grad(x.size());
  trace.errors.push_back((x - xs).norm());
  for (std::size_t t = 0; t < iters; ++t) {
    grad.noalias() = g * x;
    grad -= b;
    x = x - gamma * grad;
    trace.errors.push_back((x - xs).norm());
  }
  trace.final_iterate = std::move(x);
  trace.wall_seconds = seconds_since(t0);
  return trace;
}

SolverTrace run_hb(const BlockProblem& problem, double alpha, double beta, std::size_t iters,
                   const std::optional<Vector>& x0) {
  check_step(alpha, "alpha");
  if (!std::isfinite(beta) || beta < 0.0) throw Error(ErrorCode::BadStepsize, "beta must be nonnegative");
  check_iters(iters);
  const auto t0 = Clock::now();
  const Matrix& g = problem.gram();
  const Vector& b = problem.aty();
  const Vector& xs = problem.xstar();

  SolverTrace trace;
  trace.method = Method::HB;
  trace.alpha = alpha;
  trace.beta = beta;
  trace.seed = problem.seed();
  trace.errors.reserve(iters + 1);

  Vector x = start_point(problem, x0);
  Vector x_old = x;
  Vector grad(x.size());
  trace.errors.push_back((x - xs).norm());
  for (std::size_t t = 0; t < iters; ++t) {
    grad.noalias() = g * x;
    grad -= b;
    Vector x_new = x - alpha * grad + beta * (x - x_old);
    x_old = std::move(x);
    x = std::move(x_new);
    trace.errors.push_back((x - xs).norm());
  }
  trace.final_iterate = std::move(x);
  trace.wall_seconds = seconds_since(t0);
  return trace;
}

namespace {

// In-place sweep. Under block-wise orthogonality the diagonal Gram blocks
// are identities and only C = A2'A1 is touched.
void sweep(const BlockProblem& p, double g1, double g2, Vector& x) {
  const auto n1 = static_cast<Eigen::Index>(p.n1());
  const auto n2 = static_cast<Eigen::Index>(p.n2());
  auto x1 = x.head(n1);
  auto x2 = x.tail(n2);
  const auto b1 = p.aty().head(n1);
  const auto b2 = p.aty().tail(n2);
  if (p.assumes_bwo()) {
    const Matrix& c = p.c();
    Vector r1 = c.transpose() * x2 - b1;
    x1 = (1.0 - g1) * x1 - g1 * r1;
    Vector r2 = c * x1 - b2;
    x2 = (1.0 - g2) * x2 - g2 * r2;
  } else {
    const Matrix& g = p.gram();
    Vector r1 = g.block(0, 0, n1, n1) * x1 + g.block(0, n1, n1, n2) * x2 - b1;
    x1 -= g1 * r1;
    Vector r2 = g.block(n1, 0, n2, n1) * x1 + g.block(n1, n1, n2, n2) * x2 - b2;
    x2 -= g2 * r2;
  }
}

}  // namespace

Vector bgd_step(const BlockProblem& problem, double gamma1, double gamma2, const Vector& x) {
  check_step(gamma1, "gamma1");
  check_step(gamma2, "gamma2");
  Vector out = start_point(problem, x);
  sweep(problem, gamma1, gamma2, out);
  return out;
}

SolverTrace run_bgd(const BlockProblem& problem, double gamma1, double gamma2, std::size_t iters,
                    const std::optional<Vector>& x0) {
  check_step(gamma1, "gamma1");
  check_step(gamma2, "gamma2");
  check_iters(iters);
  const auto t0 = Clock::now();
  const Vector& xs = problem.xstar();

  SolverTrace trace;
  trace.method = Method::BGD;
  trace.gamma1 = gamma1;
  trace.gamma2 = gamma2;
  trace.seed = problem.seed();
  trace.errors.reserve(iters + 1);

  Vector x = start_point(problem, x0);
  trace.errors.push_back((x - xs).norm());
  for (std::size_t t = 0; t < iters; ++t) {
    sweep(problem, gamma1, gamma2, x);
    trace.errors.push_back((x - xs).norm());
  }
  trace.final_iterate = std::move(x);
  trace.wall_seconds = seconds_since(t0);
  return trace;
}

SolverTrace run_bem(const BlockProblem& problem, std::size_t iters, const std::optional<Vector>& x0) {
  if (!problem.assumes_bwo()) {
    throw Error(ErrorCode::NotBWO, "block exact minimization via unit steps needs orthonormal blocks");
  }
  SolverTrace trace = run_bgd(problem, 1.0, 1.0, iters, x0);
  trace.method = Method::BEM;
  return trace;
}

BlockQrSolution solve_via_block_qr(const Matrix& a1, const Matrix& a2, const Vector& y, std::size_t iters) {
  if (a1.rows() != a2.rows() || a1.rows() != y.size()) throw Error(ErrorCode::BadShape, "row mismatch");
  const ThinQr f1 = qr_thin(a1);
  const ThinQr f2 = qr_thin(a2);
  const BlockProblem inner = BlockProblem::create(f1.q, f2.q, y);

  BlockQrSolution out;
  if (inner.r() == 0) {
    // Orthogonal blocks: one exact sweep solves the problem.
    out.gamma1 = out.gamma2 = 1.0;
  } else {
    const StepsizePlan plan = optimal_plan(inner, Method::BGD);
    out.gamma1 = plan.params.at("gamma1");
    out.gamma2 = plan.params.at("gamma2");
    out.predicted_rho = plan.predicted_rho;
  }
  out.trace = run_bgd(inner, out.gamma1, out.gamma2, iters);
  const Vector& z = out.trace.final_iterate;
  out.x.resize(z.size());
  out.x.head(a1.cols()) = back_substitute(f1.r, z.head(a1.cols()));
  out.x.tail(a2.cols()) = back_substitute(f2.r, z.tail(a2.cols()));
  return out;
}

std::size_t pre_floor_length(std::span<const double> errors) {
  if (errors.empty() || !(errors.front() > 0.0) || !std::isfinite(errors.front())) return 0;
  const double e0 = errors.front();
  std::size_t usable = errors.size();
  for (std::size_t t = 0; t < errors.size(); ++t) {
    if (!std::isfinite(errors[t]) || errors[t] < kConvergedFloor * e0) {
      usable = t;
      break;
    }
  }

  // A run that converged deeply and then stopped moving sits on its
  // rounding floor; ratios there are noise.
  if (usable >= kMinTraceLength) {
    const std::size_t tail = std::max<std::size_t>(2, usable / 20);
    const double last = errors[usable - 1];
    if (last < 1e-8 * e0 && last >= 0.5 * errors[usable - tail]) {
      const double floor = *std::min_element(errors.begin(), errors.begin() + usable);
      for (std::size_t t = 0; t < usable; ++t) {
        if (errors[t] < 1e3 * floor) {
          usable = t;
          break;
        }
      }
    }
  }
  return usable;
}

RateEstimate asymptotic_rate(std::span<const double> errors, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw Error(ErrorCode::BadShape, "window_fraction must lie in (0, 1]");
  }
  if (errors.size() < kMinTraceLength) {
    throw Error(ErrorCode::InsufficientTail, "trace shorter than " + std::to_string(kMinTraceLength));
  }
  const double e0 = errors.front();
  if (!(e0 > 0.0) || !std::isfinite(e0)) throw Error(ErrorCode::InsufficientTail, "initial error is zero");

  const std::size_t usable = pre_floor_length(errors);
  if (usable < 5) throw Error(ErrorCode::InsufficientTail, "converged before the rate window");

  const std::size_t span = usable - 1;
  const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(window_fraction * static_cast<double>(span)));
  RateEstimate est;
  est.window_end = usable - 1;
  est.window_begin = est.window_end - w;
  const double log_rate =
      (std::log(errors[est.window_end]) - std::log(errors[est.window_begin])) / static_cast<double>(w);
  est.rho_hat = std::exp(log_rate);
  double ss = 0.0;
  for (std::size_t t = est.window_begin; t < est.window_end; ++t) {
    const double d = std::log(errors[t + 1] / errors[t]) - log_rate;
    ss += d * d;
  }
  est.residual = std::sqrt(ss / static_cast<double>(w));
  if (est.rho_hat >= 1.0) est.diverging = true;
  if (est.rho_hat >= 1.5) est.rho_hat = std::nextafter(1.5, 0.0);
  return est;
}

}  // namespace blockstep
