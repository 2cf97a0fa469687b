#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "blockstep/altproj.hpp"
#include "blockstep/datagen.hpp"
#include "blockstep/error.hpp"
#include "blockstep/numkernels.hpp"
#include "blockstep/solvers.hpp"

#define CHECK_THROWS_CODE(expr, expected)                            \
  do {                                                               \
    bool thrown_ = false;                                            \
    try {                                                            \
      (void)(expr);                                                  \
    } catch (const blockstep::Error& e_) {                           \
      thrown_ = true;                                                \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());             \
    }                                                                \
    CHECK_MESSAGE(thrown_, "expected " #expected " from " #expr);    \
  } while (0)

namespace testing {

using blockstep::Matrix;
using blockstep::Vector;

inline Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n;
  Matrix a(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = n(gen);
  return a;
}

inline double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

/// Largest e[t+1]/e[t] over the last tenth of the usable prefix of a trace,
/// i.e. up to where it reaches its rounding floor.
inline double tail_ratio(const std::vector<double>& e) {
  // the step landing on the floor counts, the noise after it does not
  const std::size_t usable = blockstep::pre_floor_length(e);
  const std::size_t end = std::min(usable, e.size() - 1);
  if (end == 0) return 0.0;
  const std::size_t begin = end - std::max<std::size_t>(1, end / 10);
  double worst = 0.0;
  for (std::size_t t = begin; t < end; ++t) worst = std::max(worst, e[t + 1] / e[t]);
  return worst;
}

// Cross Gram with sqrt(lambda_i) planted on the diagonal.
inline Matrix planted_c(const std::vector<double>& lambdas, std::size_t n1, std::size_t n2) {
  Matrix c = Matrix::Zero(n2, n1);
  for (std::size_t i = 0; i < lambdas.size(); ++i) c(i, i) = std::sqrt(lambdas[i]);
  return c;
}

// Small block-orthonormal instance with prescribed CC' spectrum.
inline blockstep::BlockProblem planted_problem(const std::vector<double>& lambdas, std::size_t n1, std::size_t n2,
                                               std::uint64_t seed) {
  std::vector<double> angles;
  for (std::size_t i = 0; i < std::min(n1, n2); ++i) {
    angles.push_back(i < lambdas.size() ? std::acos(std::sqrt(lambdas[i])) : 1.5707963267948966);
  }
  const auto pair = blockstep::gen_subspace_pair(n1 + n2 + 3, n1, n2, angles, seed);
  const Vector y = gaussian(n1 + n2 + 3, 1, seed + 1).col(0);
  return blockstep::BlockProblem::create(pair.a1, pair.a2, y, seed);
}

}  // namespace testing
