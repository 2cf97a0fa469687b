#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "blockstep/model.hpp"
#include "blockstep/rng.hpp"

namespace blockstep {

struct GenSpec {
  std::size_t m = 200;
  std::size_t n1 = 40;
  std::size_t n2 = 60;
  double noise_level = 0.01;
  double cond_num = 1e3;
  std::uint64_t seed = 1;
  /// Number of nonzero singular values planted in C; defaults to min(n1, n2).
  std::optional<std::size_t> rank;
};

/// Standard normal matrix.
Matrix random_normal(std::size_t rows, std::size_t cols, Rng& rng);

/// Orthogonal matrix from QR of a standard normal matrix, R diagonal made positive.
Matrix random_orthogonal(std::size_t n, Rng& rng);

/// n2 x n1 matrix with singular values L and rank-1 uniform draws in (0, L],
/// laid out on the diagonal and zero-padded; remaining values are zero when
/// `rank` is below min(n1, n2).
Matrix gen_bounded_sv_matrix(std::size_t n2, std::size_t n1, double bound, std::uint64_t seed,
                             std::optional<std::size_t> rank = std::nullopt);

/// Block-wise orthogonal instance with cond(A'A) = cond_num.
BlockProblem gen_instance(const GenSpec& spec);

/// Two unit columns with a1'a2 = c, one column per block.
BlockProblem gen_two_column(double c, std::uint64_t seed, std::size_t m = 5);

struct SubspacePair;

/// Orthonormal complement bases whose cross Gram has singular values cos(theta_i).
/// Without angles, a uniformly random pair is drawn.
SubspacePair gen_subspace_pair(std::size_t m, std::size_t n1, std::size_t n2,
                               const std::optional<std::vector<double>>& angles,
                               std::uint64_t seed);

}  // namespace blockstep
