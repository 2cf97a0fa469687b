#include <doctest.h>

#include <cmath>
#include <numbers>

#include "blockstep/altproj.hpp"
#include "blockstep/datagen.hpp"
#include "blockstep/stepsizes.hpp"
#include "blockstep/spectrum.hpp"
#include "support.hpp"

using namespace blockstep;

TEST_CASE("rng is deterministic and in range") {
  Rng a(123), b(123), c(124);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
  Rng u(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    const double w = u.uniform_open_closed();
    CHECK(w > 0.0);
    CHECK(w <= 1.0);
  }
}

TEST_CASE("normal draws have roughly unit variance") {
  Rng r(9);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    sum += v;
    sq += v * v;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("bounded singular values") {
  const Matrix one = gen_bounded_sv_matrix(3, 1, 0.4, 2);
  CHECK(singular_values(one)(0) == doctest::Approx(0.4).epsilon(1e-12));

  const Matrix c = gen_bounded_sv_matrix(3, 3, 0.5, 42);
  const Vector s = singular_values(c);
  CHECK(std::abs(s(0) - 0.5) <= 1e-12);
  CHECK(s.minCoeff() > 0.0);
  CHECK(s.maxCoeff() <= 0.5 + 1e-15);
  CHECK(numerical_rank(s) == 3);

  const Matrix low = gen_bounded_sv_matrix(5, 4, 0.9, 3, 2);
  CHECK(numerical_rank(singular_values(low)) == 2);

  CHECK_THROWS_CODE(gen_bounded_sv_matrix(2, 2, 1.0, 1), ErrorCode::OutOfRange);
  CHECK_THROWS_CODE(gen_bounded_sv_matrix(2, 2, 0.0, 1), ErrorCode::OutOfRange);
}

TEST_CASE("gen_instance at kappa 10") {
  const auto p = gen_instance(GenSpec{.m = 50, .n1 = 8, .n2 = 12, .cond_num = 10.0, .seed = 6});
  CHECK(p.assumes_bwo());
  CHECK(singular_values(p.c())(0) == doctest::Approx(9.0 / 11.0).epsilon(1e-12));
  const Vector e = sym_eigvals(p.gram());
  CHECK(e(0) / e(e.size() - 1) == doctest::Approx(10.0).epsilon(1e-10));
  for (Eigen::Index j = 0; j < p.c().cols(); ++j) CHECK(p.c().col(j).norm() < 1.0);
}

TEST_CASE("noise-free generation makes y consistent") {
  const auto p = gen_instance(GenSpec{.m = 50, .n1 = 8, .n2 = 12, .noise_level = 0.0, .cond_num = 40.0, .seed = 2});
  CHECK((p.a() * p.xstar() - p.y()).norm() <= 1e-8 * p.y().norm());
}

TEST_CASE("large instance keeps its condition number") {
  const auto p = gen_instance(GenSpec{.m = 1000, .n1 = 300, .n2 = 500, .noise_level = 0.01, .cond_num = 1e5, .seed = 1});
  const auto v = validate(p);
  CHECK(v.assumes_bwo);
  CHECK(std::abs(v.kappa - 1e5) <= 1e-6 * 1e5);
}

TEST_CASE("gen_instance validation") {
  CHECK_THROWS_CODE(gen_instance(GenSpec{.m = 2, .n1 = 2, .n2 = 2}), ErrorCode::BadShape);
  CHECK_THROWS_CODE(gen_instance(GenSpec{.m = 20, .n1 = 2, .n2 = 2, .cond_num = 1.0}), ErrorCode::OutOfRange);
}

TEST_CASE("same seed gives identical instances") {
  const GenSpec spec{.m = 40, .n1 = 5, .n2 = 7, .cond_num = 30.0, .seed = 77};
  const auto a = gen_instance(spec);
  const auto b = gen_instance(spec);
  CHECK(a.a1() == b.a1());
  CHECK(a.a2() == b.a2());
  CHECK(a.y() == b.y());
  auto other = spec;
  other.seed = 78;
  CHECK(gen_instance(other).a1() != a.a1());
}

TEST_CASE("two-column instance") {
  const auto p = gen_two_column(0.5, 3);
  CHECK(p.n1() == 1);
  CHECK(p.n2() == 1);
  CHECK(p.c()(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p.lambda1() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p.a1().col(0).norm() == doctest::Approx(1.0));
  CHECK(p.a2().col(0).norm() == doctest::Approx(1.0));
  const std::vector<double> l{p.lambda1()};
  CHECK(spectral_radius(l, 1, 1, 1.0, 1.0) == doctest::Approx(0.25));
  CHECK(spectral_radius(l, 1, 1, 1.0, 1.0 / (1.0 - 0.25)) <= 1e-14);
  CHECK_THROWS_CODE(gen_two_column(1.0, 1), ErrorCode::OutOfRange);
  CHECK_THROWS_CODE(gen_two_column(0.0, 1), ErrorCode::OutOfRange);
}

TEST_CASE("subspace pairs with planted angles") {
  const double pi = std::numbers::pi;
  const auto p = gen_subspace_pair(2, 1, 1, std::vector<double>{pi / 3}, 4);
  CHECK(std::abs((p.a2.transpose() * p.a1)(0, 0)) == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(p.thetas.size() == 1);
  CHECK(p.thetas[0] == doctest::Approx(pi / 3).epsilon(1e-12));

  const auto q = gen_subspace_pair(6, 2, 2, std::vector<double>{pi / 6, pi / 2}, 5);
  const Vector s = singular_values(q.a2.transpose() * q.a1);
  CHECK(s(0) == doctest::Approx(std::cos(pi / 6)).epsilon(1e-10));
  CHECK(s(1) <= 1e-10);
  CHECK(q.r == 1);

  const std::vector<double> planted{0.2, 0.7, 1.1};
  const auto r = gen_subspace_pair(12, 3, 4, planted, 13);
  REQUIRE(r.thetas.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(r.thetas[i] - planted[i]) <= 1e-8);

  CHECK_THROWS_CODE(gen_subspace_pair(6, 2, 2, std::vector<double>{0.0, 0.5}, 1), ErrorCode::OutOfRange);
  CHECK_THROWS_CODE(gen_subspace_pair(6, 2, 2, std::vector<double>{0.5}, 1), ErrorCode::BadShape);
  CHECK_THROWS_CODE(gen_subspace_pair(3, 2, 2, std::nullopt, 1), ErrorCode::BadShape);
}

TEST_CASE("random subspace pair reports measured angles") {
  const auto p = gen_subspace_pair(10, 3, 4, std::nullopt, 13);
  CHECK(p.thetas.size() == 3);
  const auto again = principal_angles(p.a1, p.a2);
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i] == doctest::Approx(p.thetas[i]));
}
