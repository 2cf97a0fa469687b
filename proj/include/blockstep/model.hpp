#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blockstep/numkernels.hpp"

namespace blockstep {

/// Result of checking a two-block least-squares instance.
struct ValidationOutcome {
  bool full_column_rank = false;
  bool assumes_bwo = false;
  double gram_dev1 = 0.0;  // ||A1^T A1 - I||_inf
  double gram_dev2 = 0.0;  // ||A2^T A2 - I||_inf
  bool cross_nonzero = false;
  std::size_t r = 0;        // numerical rank of C = A2^T A1
  Vector sigma_c;           // all min(n1, n2) singular values of C, descending
  Vector lambdas_cc;        // the r nonzero eigenvalues of C C^T, descending
  double ata_max = 0.0;     // extreme eigenvalues of A^T A
  double ata_min = 0.0;
  double kappa = 0.0;       // ata_max / ata_min (inf when singular)
};

inline constexpr double kBwoTol = 1e-10;

ValidationOutcome validate(const Matrix& a1, const Matrix& a2, const Vector& y);

/// Two-block least-squares problem min ||A1 x1 + A2 x2 - y||.
///
/// Immutable once built. The minimizer x*, the cross Gram C and its
/// spectrum, and the normal-equation pieces used by the solvers are
/// computed once in create().
class BlockProblem {
public:
  static BlockProblem create(Matrix a1, Matrix a2, Vector y,
                             std::optional<std::uint64_t> seed = std::nullopt);

  std::size_t m() const { return static_cast<std::size_t>(a1_.rows()); }
  std::size_t n1() const { return static_cast<std::size_t>(a1_.cols()); }
  std::size_t n2() const { return static_cast<std::size_t>(a2_.cols()); }
  std::size_t n() const { return n1() + n2(); }

  const Matrix& a1() const { return a1_; }
  const Matrix& a2() const { return a2_; }
  const Vector& y() const { return y_; }
  std::optional<std::uint64_t> seed() const { return seed_; }

  /// [A1 A2]
  Matrix a() const;
  const Matrix& c() const { return c_; }
  const Matrix& gram() const { return gram_; }   // A^T A
  const Vector& aty() const { return aty_; }     // A^T y
  const Vector& xstar() const { return xstar_; }

  const ValidationOutcome& validation() const { return validation_; }
  bool assumes_bwo() const { return validation_.assumes_bwo; }
  std::size_t r() const { return validation_.r; }
  const Vector& lambdas_cc() const { return validation_.lambdas_cc; }
  double lambda1() const;

private:
  BlockProblem() = default;

  Matrix a1_, a2_;
  Vector y_;
  std::optional<std::uint64_t> seed_;
  Matrix c_, gram_;
  Vector aty_, xstar_;
  ValidationOutcome validation_;
};

inline ValidationOutcome validate(const BlockProblem& p) { return validate(p.a1(), p.a2(), p.y()); }

/// Minimizer of ||[A1 A2] x - y|| via thin QR and back substitution.
Vector least_squares_solution(const Matrix& a, const Vector& y);
inline Vector least_squares_solution(const BlockProblem& p) { return p.xstar(); }

enum class Method { GD, HB, BGD, BEM, AP, DR, RAP, PRAP, GDR, GAP, GAPXX };

std::string_view to_string(Method m) noexcept;
Method method_from_string(std::string_view s);

struct StepsizePlan {
  Method method = Method::GD;
  std::map<std::string, double> params;  // gamma, alpha, beta, gamma1, gamma2
  double predicted_rho = 0.0;
};

/// Per-iteration distances to the reference solution.
struct SolverTrace {
  Method method = Method::GD;
  std::optional<double> gamma1, gamma2, alpha, beta;
  std::vector<double> errors;
  std::optional<std::uint64_t> seed;
  double wall_seconds = 0.0;
  Vector final_iterate;
};

}  // namespace blockstep
