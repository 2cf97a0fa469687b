#include "blockstep/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "blockstep/altproj.hpp"
#include "blockstep/error.hpp"

namespace blockstep {

Matrix random_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = rng.normal();
  }
  return out;
}

Matrix random_orthogonal(std::size_t n, Rng& rng) { return qr_thin(random_normal(n, n, rng)).q; }

Matrix gen_bounded_sv_matrix(std::size_t n2, std::size_t n1, double bound, std::uint64_t seed,
                             std::optional<std::size_t> rank) {
  if (!(bound > 0.0 && bound < 1.0)) throw Error(ErrorCode::OutOfRange, "singular value bound must lie in (0, 1)");
  if (n1 == 0 || n2 == 0) throw Error(ErrorCode::BadShape, "empty block");
  const std::size_t k = std::min(n1, n2);
  const std::size_t nonzero = rank.value_or(k);
  if (nonzero < 1 || nonzero > k) throw Error(ErrorCode::OutOfRange, "rank must lie in [1, min(n1, n2)]");

  Rng rng(seed);
  std::vector<double> svs{bound};
  for (std::size_t i = 1; i < nonzero; ++i) svs.push_back(bound * rng.uniform_open_closed());
  std::sort(svs.begin(), svs.end(), std::greater<>());

  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(n2), static_cast<Eigen::Index>(n1));
  for (std::size_t i = 0; i < svs.size(); ++i) c(i, i) = svs[i];
  return c;
}

BlockProblem gen_instance(const GenSpec& spec) {
  if (spec.n1 == 0 || spec.n2 == 0) throw Error(ErrorCode::BadShape, "n1 and n2 must be positive");
  if (spec.m < spec.n1 + spec.n2) throw Error(ErrorCode::BadShape, "m must be at least n1 + n2");
  if (!(spec.cond_num > 1.0) || !std::isfinite(spec.cond_num)) {
    throw Error(ErrorCode::OutOfRange, "condition number must exceed 1");
  }
  if (!(spec.noise_level >= 0.0) || !std::isfinite(spec.noise_level)) {
    throw Error(ErrorCode::OutOfRange, "noise level must be nonnegative");
  }
  const auto m = static_cast<Eigen::Index>(spec.m);
  const auto n1 = static_cast<Eigen::Index>(spec.n1);
  const auto n2 = static_cast<Eigen::Index>(spec.n2);

  Rng rng(spec.seed);
  const double bound = (spec.cond_num - 1.0) / (spec.cond_num + 1.0);
  const Matrix c = gen_bounded_sv_matrix(spec.n2, spec.n1, bound, rng.next_u64(), spec.rank);

  // Pad each column of C with an orthogonal direction of norm sqrt(1 - |c_j|^2)
  // so that A1 gets orthonormal columns.
  Matrix u = qr_thin(random_normal(spec.m - spec.n2, spec.n1, rng)).q;
  for (Eigen::Index j = 0; j < n1; ++j) {
    const double s = c.col(j).norm();
    u.col(j) *= std::sqrt(1.0 - s * s);
  }
  Matrix a1(m, n1);
  a1 << c, u;
  Matrix a2 = Matrix::Zero(m, n2);
  a2.topRows(n2).setIdentity();

  a1 = a1 * random_orthogonal(spec.n1, rng);
  a2 = a2 * random_orthogonal(spec.n2, rng);

  Vector x_true(n1 + n2);
  for (auto& v : x_true) v = rng.normal();
  Vector noise(m);
  for (auto& v : noise) v = rng.normal();
  noise /= noise.norm();

  Vector y = a1 * x_true.head(n1) + a2 * x_true.tail(n2) + spec.noise_level * noise;
  return BlockProblem::create(std::move(a1), std::move(a2), std::move(y), spec.seed);
}

BlockProblem gen_two_column(double c, std::uint64_t seed, std::size_t m) {
  if (!(std::abs(c) > 0.0 && std::abs(c) < 1.0)) throw Error(ErrorCode::OutOfRange, "|c| must lie in (0, 1)");
  if (m < 2) throw Error(ErrorCode::BadShape, "need at least two rows");
  Rng rng(seed);
  const Matrix frame = qr_thin(random_normal(m, 2, rng)).q;
  Matrix a1 = frame.col(0);
  Matrix a2 = c * frame.col(0) + std::sqrt(1.0 - c * c) * frame.col(1);
  Vector y(static_cast<Eigen::Index>(m));
  for (auto& v : y) v = rng.normal();
  return BlockProblem::create(std::move(a1), std::move(a2), std::move(y), seed);
}

SubspacePair gen_subspace_pair(std::size_t m, std::size_t n1, std::size_t n2,
                               const std::optional<std::vector<double>>& angles, std::uint64_t seed) {
  if (n1 == 0 || n2 == 0) throw Error(ErrorCode::BadShape, "n1 and n2 must be positive");
  if (m < n1 + n2) throw Error(ErrorCode::BadShape, "m must be at least n1 + n2");
  Rng rng(seed);
  const auto rows = static_cast<Eigen::Index>(m);

  if (!angles) {
    Matrix a1 = qr_thin(random_normal(m, n1, rng)).q;
    Matrix a2 = qr_thin(random_normal(m, n2, rng)).q;
    return SubspacePair::from_bases(std::move(a1), std::move(a2));
  }

  const std::size_t k = std::min(n1, n2);
  if (angles->size() != k) throw Error(ErrorCode::BadShape, "need exactly min(n1, n2) angles");
  constexpr double half_pi = std::numbers::pi / 2.0;
  std::vector<double> theta(*angles);
  for (auto& t : theta) {
    // Decimal inputs such as 1.5708 slightly overshoot pi/2.
    if (t > half_pi && t <= half_pi + 1e-4) t = half_pi;
    if (!(t > 0.0 && t <= half_pi)) {
      throw Error(ErrorCode::OutOfRange, "principal angles must lie in (0, pi/2]");
    }
  }

  Matrix a1 = Matrix::Zero(rows, static_cast<Eigen::Index>(n1));
  Matrix a2 = Matrix::Zero(rows, static_cast<Eigen::Index>(n2));
  for (std::size_t j = 0; j < n1; ++j) a1(j, j) = 1.0;
  for (std::size_t i = 0; i < n2; ++i) {
    if (i < k) {
      a2(i, i) = std::cos(theta[i]);
      a2(n1 + i, i) = std::sin(theta[i]);
    } else {
      a2(n1 + i, i) = 1.0;
    }
  }
  const Matrix rot = random_orthogonal(m, rng);
  a1 = rot * a1 * random_orthogonal(n1, rng);
  a2 = rot * a2 * random_orthogonal(n2, rng);
  return SubspacePair::from_bases(std::move(a1), std::move(a2));
}

}  // namespace blockstep
