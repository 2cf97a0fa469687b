#pragma once

#include <cstdint>

namespace blockstep {

/// xoshiro256** seeded through splitmix64.
///
/// Every random draw in the library goes through this generator so that a
/// given seed produces bit-identical instances on any platform. Normal
/// variates use the polar Box-Muller method implemented here rather than
/// std::normal_distribution, whose output is implementation defined.
class Rng {
public:
  static constexpr int kVersion = 1;

  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1].
  double uniform_open_closed() noexcept { return 1.0 - uniform(); }
  double normal() noexcept;

private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace blockstep
