#include "blockstep/stepsizes.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "blockstep/error.hpp"
#include "blockstep/spectrum.hpp"

namespace blockstep {

std::string_view to_string(BgdBranch b) noexcept {
  switch (b) {
    case BgdBranch::RankDeficient: return "RankDeficient";
    case BgdBranch::FullRankEqual: return "FullRankEqual";
    case BgdBranch::FullRankN1: return "FullRankN1";
    case BgdBranch::FullRankN2: return "FullRankN2";
    case BgdBranch::RankOneZero: return "RankOneZero";
  }
  return "?";
}

namespace {

void check_extremes(double lmax, double lmin) {
  if (!(lmin > 0.0) || !(lmax >= lmin) || !std::isfinite(lmax)) {
    throw Error(ErrorCode::BadSpectrum, "need 0 < lambda_min <= lambda_max");
  }
}

// The r nonzero eigenvalues of CC', validated and sorted descending.
std::vector<double> checked_lambdas(std::span<const double> lambdas) {
  if (lambdas.empty()) throw Error(ErrorCode::OutOfRange, "C must be nonzero (r >= 1)");
  std::vector<double> l(lambdas.begin(), lambdas.end());
  for (double v : l) {
    if (!(v > 0.0 && v < 1.0)) {
      throw Error(ErrorCode::OutOfRange, "eigenvalue of CC' outside (0, 1): " + std::to_string(v));
    }
  }
  std::sort(l.begin(), l.end(), std::greater<>());
  return l;
}

std::pair<double, double> extremes(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*hi, *lo};
}

}  // namespace

ScalarOptimum gd_optimal(double lambda_max, double lambda_min) {
  check_extremes(lambda_max, lambda_min);
  return {2.0 / (lambda_max + lambda_min), (lambda_max - lambda_min) / (lambda_max + lambda_min)};
}

HbOptimum hb_optimal(double lambda_max, double lambda_min) {
  check_extremes(lambda_max, lambda_min);
  const double a = std::sqrt(lambda_max);
  const double b = std::sqrt(lambda_min);
  const double rho = (a - b) / (a + b);
  const double alpha = std::pow(2.0 / (a + b), 2);
  return {alpha, rho * rho, rho};
}

BgdOptimum bgd_optimal(std::span<const double> lambdas, std::size_t n1, std::size_t n2) {
  const auto l = checked_lambdas(lambdas);
  const std::size_t r = l.size();
  if (r > std::min(n1, n2)) throw Error(ErrorCode::BadShape, "rank exceeds min(n1, n2)");

  BgdOptimum out;
  if (r < std::min(n1, n2)) {
    const double e = equal_stepsizes(l.front()).gamma;
    out.gamma1 = out.gamma2 = e;
    const double t = std::sqrt(1.0 - l.front());
    out.rho = (1.0 - t) / (1.0 + t);
    out.branch = BgdBranch::RankDeficient;
    return out;
  }

  // Full rank: pull the heavy-ball optimum over zeta_i = 1 - lambda_i back
  // through (g1, g2) -> (g1 g2, (g1 - 1)(g2 - 1)).
  const double s_hi = std::sqrt(1.0 - l.back());
  const double s_lo = std::sqrt(1.0 - l.front());
  const double p = std::sqrt((1.0 + s_lo) * (1.0 + s_hi));
  const double q = std::sqrt((1.0 - s_lo) * (1.0 - s_hi));
  const double big = std::pow((p + q) / (s_hi + s_lo), 2);
  const double small = std::pow((p - q) / (s_hi + s_lo), 2);
  out.rho = std::max(0.0, (s_hi - s_lo) / (s_hi + s_lo));

  if (n1 < n2) {
    out.gamma1 = big;
    out.gamma2 = small;
    out.branch = BgdBranch::FullRankN1;
  } else if (n2 < n1) {
    out.gamma1 = small;
    out.gamma2 = big;
    out.branch = BgdBranch::FullRankN2;
  } else {
    out.gamma1 = big;
    out.gamma2 = small;
    out.branch = BgdBranch::FullRankEqual;
  }
  if (r == 1) {
    out.rho = 0.0;
    out.branch = BgdBranch::RankOneZero;
  }
  return out;
}

ScalarOptimum minmax_stepsize(std::span<const double> xi) {
  if (xi.empty()) throw Error(ErrorCode::BadSpectrum, "empty xi");
  for (double v : xi) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::BadSpectrum, "xi must be positive");
  }
  const auto [hi, lo] = extremes(xi);
  if (xi.size() == 1) return {1.0 / hi, 0.0};
  return {2.0 / (hi + lo), (hi - lo) / (hi + lo)};
}

ScalarOptimum fixed_gamma2_one(std::span<const double> lambdas, std::size_t n1) {
  const auto l = checked_lambdas(lambdas);
  const std::size_t r = l.size();
  if (r > n1) throw Error(ErrorCode::BadShape, "rank exceeds n1");
  const double l1 = l.front();
  const double lr = l.back();
  if (r < n1) return {2.0 / (2.0 - l1), l1 / (2.0 - l1)};
  if (r == 1) return {1.0 / (1.0 - l1), 0.0};
  return {2.0 / (2.0 - l1 - lr), (l1 - lr) / (2.0 - l1 - lr)};
}

ScalarOptimum equal_stepsizes(double lambda1) {
  if (!(lambda1 > 0.0 && lambda1 < 1.0)) throw Error(ErrorCode::OutOfRange, "lambda1 outside (0, 1)");
  const double g = 2.0 / (1.0 + std::sqrt(1.0 - lambda1));
  return {g, g - 1.0};
}

HbOptimum heavyball_minmax(std::span<const double> zeta) {
  if (zeta.size() < 2) throw Error(ErrorCode::TooFew, "heavy-ball min-max needs at least two values");
  for (double v : zeta) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::BadSpectrum, "zeta must be positive");
  }
  const auto [hi, lo] = extremes(zeta);
  return hb_optimal(hi, lo);
}

GridOptimum grid_search_region(std::span<const double> lambdas, std::size_t n1, std::size_t n2,
                               double lo1, double hi1, double lo2, double hi2, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::BadStepsize, "grid step must be positive");
  auto index_range = [step](double lo, double hi) {
    const auto first = std::max<long>(1, static_cast<long>(std::ceil(lo / step - 1e-9)));
    const auto last = static_cast<long>(std::floor(hi / step + 1e-9));
    return std::pair{first, last};
  };
  const auto [i0, i1] = index_range(lo1, hi1);
  const auto [j0, j1] = index_range(lo2, hi2);
  if (i1 < i0 || j1 < j0) throw Error(ErrorCode::BadShape, "empty grid");

  const std::vector<double> l(lambdas.begin(), lambdas.end());
  spectral_radius(l, n1, n2, 1.0, 1.0);  // validates the spectrum once

  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 16u));
  const long rows = i1 - i0 + 1;
  std::vector<GridOptimum> best(workers, GridOptimum{0.0, 0.0, INFINITY});
  auto scan = [&](unsigned w) {
    const long begin = i0 + rows * w / workers;
    const long end = i0 + rows * (w + 1) / workers;
    GridOptimum b{0.0, 0.0, INFINITY};
    for (long i = begin; i < end; ++i) {
      const double g1 = static_cast<double>(i) * step;
      for (long j = j0; j <= j1; ++j) {
        const double g2 = static_cast<double>(j) * step;
        const double rho = spectral_radius(l, n1, n2, g1, g2);
        if (rho < b.rho) b = {g1, g2, rho};
      }
    }
    best[w] = b;
  };
  if (workers == 1) {
    scan(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(scan, w);
    for (auto& t : pool) t.join();
  }
  GridOptimum out = best.front();
  for (const auto& b : best) {
    if (b.rho < out.rho) out = b;
  }
  return out;
}

GridOptimum grid_search_min_rho(std::span<const double> lambdas, std::size_t n1, std::size_t n2,
                                double gamma_max, double step) {
  return grid_search_region(lambdas, n1, n2, step, gamma_max, step, gamma_max, step);
}

double gd_spectral_radius(std::span<const double> eigs, double gamma) {
  double rho = 0.0;
  for (double l : eigs) rho = std::max(rho, std::abs(1.0 - gamma * l));
  return rho;
}

double hb_spectral_radius(std::span<const double> eigs, double alpha, double beta) {
  double rho = 0.0;
  for (double l : eigs) rho = std::max(rho, max_root_modulus(1.0 + beta - alpha * l, beta));
  return rho;
}

std::pair<double, double> gram_extremes(const BlockProblem& problem) {
  if (problem.assumes_bwo()) {
    const double s = std::sqrt(problem.lambda1());
    return {1.0 + s, 1.0 - s};
  }
  return {problem.validation().ata_max, problem.validation().ata_min};
}

namespace {

void require_bwo(const BlockProblem& problem) {
  if (!problem.assumes_bwo()) {
    throw Error(ErrorCode::NotBWO, "blocks are not orthonormal (block-wise orthogonality fails)");
  }
}

double param(const StepsizePlan& plan, const char* key) {
  const auto it = plan.params.find(key);
  if (it == plan.params.end()) throw Error(ErrorCode::BadStepsize, std::string("missing parameter ") + key);
  return it->second;
}

std::vector<double> lambdas_of(const BlockProblem& p) {
  return {p.lambdas_cc().data(), p.lambdas_cc().data() + p.lambdas_cc().size()};
}

}  // namespace

StepsizePlan optimal_plan(const BlockProblem& problem, Method method) {
  StepsizePlan plan;
  plan.method = method;
  switch (method) {
    case Method::GD: {
      const auto [hi, lo] = gram_extremes(problem);
      const auto opt = gd_optimal(hi, lo);
      plan.params["gamma"] = opt.gamma;
      plan.predicted_rho = opt.rho;
      break;
    }
    case Method::HB: {
      const auto [hi, lo] = gram_extremes(problem);
      const auto opt = hb_optimal(hi, lo);
      plan.params["alpha"] = opt.alpha;
      plan.params["beta"] = opt.beta;
      plan.predicted_rho = opt.rho;
      break;
    }
    case Method::BGD: {
      require_bwo(problem);
      const auto opt = bgd_optimal(lambdas_of(problem), problem.n1(), problem.n2());
      plan.params["gamma1"] = opt.gamma1;
      plan.params["gamma2"] = opt.gamma2;
      plan.predicted_rho = opt.rho;
      break;
    }
    case Method::BEM: {
      require_bwo(problem);
      plan.params["gamma1"] = 1.0;
      plan.params["gamma2"] = 1.0;
      plan.predicted_rho = spectral_radius(lambdas_of(problem), problem.n1(), problem.n2(), 1.0, 1.0);
      break;
    }
    default:
      throw Error(ErrorCode::BadStepsize,
                  "method '" + std::string(to_string(method)) + "' does not apply to a least-squares instance");
  }
  return plan;
}

double predicted_rho(const BlockProblem& problem, const StepsizePlan& plan) {
  const auto [hi, lo] = gram_extremes(problem);
  const double ext[] = {hi, lo};
  switch (plan.method) {
    case Method::GD: return gd_spectral_radius(ext, param(plan, "gamma"));
    case Method::HB: return hb_spectral_radius(ext, param(plan, "alpha"), param(plan, "beta"));
    case Method::BGD:
    case Method::BEM: {
      const double g1 = plan.method == Method::BEM ? 1.0 : param(plan, "gamma1");
      const double g2 = plan.method == Method::BEM ? 1.0 : param(plan, "gamma2");
      if (problem.assumes_bwo()) return spectral_radius(lambdas_of(problem), problem.n1(), problem.n2(), g1, g2);
      if (plan.method == Method::BEM) require_bwo(problem);
      const Eigen::EigenSolver<Matrix> es(build_m(problem, g1, g2), false);
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    default:
      throw Error(ErrorCode::BadStepsize, "method does not apply to a least-squares instance");
  }
}

}  // namespace blockstep
