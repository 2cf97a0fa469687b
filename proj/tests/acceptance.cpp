// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "blockstep/altproj.hpp"
#include "blockstep/datagen.hpp"
#include "blockstep/io.hpp"
#include "blockstep/solvers.hpp"
#include "blockstep/spectrum.hpp"
#include "blockstep/stepsizes.hpp"
#include "support.hpp"

using namespace blockstep;

namespace {

constexpr double kPi = std::numbers::pi;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    o.pass = false;
    o.detail += " [over time budget]";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d %s: %s (%.2fs) %s\n", id, o.pass ? "PASS" : "FAIL", title, secs, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Spectrum {
  std::vector<double> lambdas;
  std::size_t n1, n2;
};

// Expected (value, multiplicity) list straight from the multiplicity table.
std::vector<std::pair<std::complex<double>, std::size_t>> table_spectrum(const Spectrum& s, double g1, double g2) {
  using C = std::complex<double>;
  const std::size_t r = s.lambdas.size();
  std::vector<std::pair<C, std::size_t>> raw;
  auto add = [&](C z, std::size_t k) {
    if (k) raw.emplace_back(z, k);
  };
  if (g1 == 1.0) {
    add(0.0, s.n1);
    add(1 - g2, s.n2 - r);
    for (double l : s.lambdas) add(1 - g2 + g2 * l, 1);
  } else if (g2 == 1.0) {
    add(0.0, s.n2);
    add(1 - g1, s.n1 - r);
    for (double l : s.lambdas) add(1 - g1 + g1 * l, 1);
  } else {
    add(1 - g1, s.n1 - r);
    add(1 - g2, s.n2 - r);
    for (double l : s.lambdas) {
      const double b = 2 - g1 - g2 + g1 * g2 * l, c = (1 - g1) * (1 - g2);
      const C d = std::sqrt(C(b * b - 4 * c));
      add((b + d) / 2.0, 1);
      add((b - d) / 2.0, 1);
    }
  }
  std::vector<std::pair<C, std::size_t>> merged;
  for (const auto& [z, k] : raw) {
    auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& e) { return std::abs(e.first - z) <= kMergeTol; });
    if (it == merged.end())
      merged.emplace_back(z, k);
    else
      it->second += k;
  }
  return merged;
}

// Random lambda spectra, half rank deficient and half full rank. Draws whose
// closed-form optimum leaves the (0, 4]^2 search box are redrawn.
std::vector<Spectrum> spectrum_corpus(std::size_t count, std::uint64_t seed, std::size_t* redrawn) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  std::uniform_real_distribution<double> u(0.02, 0.98);
  std::vector<Spectrum> out;
  *redrawn = 0;
  while (out.size() < count) {
    const bool deficient = out.size() % 2 == 0;
    Spectrum s{{}, pick(1, 6), pick(1, 6)};
    const std::size_t lo = std::min(s.n1, s.n2);
    if (deficient && lo < 2) continue;
    const std::size_t r = deficient ? pick(1, lo - 1) : lo;
    for (std::size_t i = 0; i < r; ++i) s.lambdas.push_back(u(rng));
    std::sort(s.lambdas.begin(), s.lambdas.end(), std::greater<>());
    const auto o = bgd_optimal(s.lambdas, s.n1, s.n2);
    if (o.gamma1 > 4.0 || o.gamma2 > 4.0) {
      ++*redrawn;
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

Outcome criterion1() {
  const double grid[] = {0.25, 0.5, 1.0, 4.0 / 3.0, 1.5, 1.9};
  std::mt19937_64 rng(20240101);
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  std::size_t eig_checks = 0, bad_det = 0, bad_mult = 0, bad_case = 0, deficient = 0;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    GenSpec spec;
    spec.n1 = pick(1, 6);
    spec.n2 = pick(1, 6);
    spec.m = spec.n1 + spec.n2 + pick(0, 6);
    spec.cond_num = std::exp(std::uniform_real_distribution<double>(std::log(1.5), std::log(1e4))(rng));
    spec.seed = rng();
    const std::size_t lo = std::min(spec.n1, spec.n2);
    if (lo >= 2 && i % 3 == 0) spec.rank = pick(1, lo - 1);
    const auto p = gen_instance(spec);
    if (!p.assumes_bwo()) return {false, "generated instance is not block-wise orthonormal"};
    const Spectrum s{{p.lambdas_cc().data(), p.lambdas_cc().data() + p.lambdas_cc().size()}, p.n1(), p.n2()};
    if (s.lambdas.size() < lo) ++deficient;
    for (double g1 : grid)
      for (double g2 : grid) {
        const Matrix m = build_m(p, g1, g2);
        const double scale = std::pow(std::max(1.0, norm_inf(m)), static_cast<double>(p.n()));
        const auto rep = closed_form_spectrum(s.lambdas, s.n1, s.n2, g1, g2);
        for (const auto& e : rep.eigs) {
          const double det = std::abs(charpoly_eval(m, {e.re, e.im}));
          worst = std::max(worst, det / scale);
          ++eig_checks;
          if (det > 1e-8 * scale) ++bad_det;
        }
        if (rep.total_multiplicity() != p.n()) ++bad_mult;
        for (const auto& [z, k] : table_spectrum(s, g1, g2))
          if (rep.multiplicity_of(z.real(), z.imag()) != k) ++bad_mult;
        const auto expected = g1 == 1.0 ? SpectrumCase::Gamma1One : g2 == 1.0 ? SpectrumCase::Gamma2One : SpectrumCase::Generic;
        if (rep.spectrum_case != expected) ++bad_case;
      }
  }
  Outcome o;
  o.pass = bad_det == 0 && bad_mult == 0 && bad_case == 0;
  o.detail = fmt("200 instances (%.0f rank deficient), %.0f eigenvalues, max |det|/scale %.2e, ", double(deficient),
                 double(eig_checks), worst) +
             fmt("det failures %.0f, multiplicity mismatches %.0f, case mismatches %.0f", double(bad_det), double(bad_mult),
                 double(bad_case));
  return o;
}

Outcome criterion2(const std::vector<Spectrum>& corpus, std::size_t redrawn) {
  const double step = 0.005;
  double worst_gap = 0.0, worst_cell = 0.0;
  double worst_fine = 0.0;
  std::size_t gap_fail = 0, cell_fail = 0, full_fail = 0, beaten = 0;
  for (const auto& s : corpus) {
    const auto o = bgd_optimal(s.lambdas, s.n1, s.n2);
    const auto g = grid_search_min_rho(s.lambdas, s.n1, s.n2, 4.0, step);
    if (g.rho < o.rho - 1e-12) ++beaten;
    // informational: a fine grid around the closed-form point
    const double h = 1e-4, w = 0.05;
    const auto fine = grid_search_region(s.lambdas, s.n1, s.n2, std::max(h, o.gamma1 - w), o.gamma1 + w,
                                         std::max(h, o.gamma2 - w), o.gamma2 + w, h);
    worst_fine = std::max(worst_fine, fine.rho - o.rho);
    if (fine.rho < o.rho - 1e-12) ++beaten;
    const double gap = std::abs(g.rho - o.rho);
    double cell = std::max(std::abs(g.gamma1 - o.gamma1), std::abs(g.gamma2 - o.gamma2));
    if (s.n1 == s.n2) cell = std::min(cell, std::max(std::abs(g.gamma1 - o.gamma2), std::abs(g.gamma2 - o.gamma1)));
    worst_gap = std::max(worst_gap, gap);
    worst_cell = std::max(worst_cell, cell);
    const bool full = s.lambdas.size() == std::min(s.n1, s.n2);
    if (gap > 5e-3) {
      ++gap_fail;
      if (full) ++full_fail;
    }
    if (cell > step * (1 + 1e-9)) ++cell_fail;
  }
  Outcome o;
  o.pass = gap_fail == 0 && cell_fail == 0;
  o.detail = fmt("50 spectra (%.0f redrawn outside the box), max |grid - closed| %.2e (tol 5e-3), ", double(redrawn), worst_gap) +
             fmt("max argmin offset %.4f (tol %.3f), rho failures %.0f (full rank %.0f), ", worst_cell, step,
                 double(gap_fail), double(full_fail)) +
             fmt("argmin failures %.0f; grid below closed form in %.0f spectra; ", double(cell_fail), double(beaten)) +
             fmt("step 1e-4 local grid max gap %.2e", worst_fine);
  return o;
}

Outcome criterion3(const std::vector<Spectrum>& corpus) {
  std::size_t order_fail = 0, eq_fail = 0, deficient = 0;
  for (const auto& s : corpus) {
    const double sq = std::sqrt(s.lambdas.front());
    const double hb = hb_optimal(1 + sq, 1 - sq).rho;
    const auto o = bgd_optimal(s.lambdas, s.n1, s.n2);
    if (o.rho > hb * hb + 1e-12) ++order_fail;
    if (s.lambdas.size() < std::min(s.n1, s.n2)) {
      ++deficient;
      if (std::abs(o.rho - hb * hb) > 1e-12) ++eq_fail;
    }
  }
  const double l75[] = {0.75};
  const double rho75 = bgd_optimal(l75, 2, 2).rho;
  Outcome o;
  o.pass = order_fail == 0 && eq_fail == 0 && std::abs(rho75 - 1.0 / 3.0) <= 1e-12;
  o.detail = fmt("ordering failures %.0f, equality failures %.0f of %.0f rank deficient, lambda1 = 0.75 gives %.17g",
                 double(order_fail), double(eq_fail), double(deficient), rho75);
  return o;
}

Outcome criterion4() {
  const auto p = gen_instance(GenSpec{});
  const auto gd = optimal_plan(p, Method::GD), hb = optimal_plan(p, Method::HB), bgd = optimal_plan(p, Method::BGD);
  const auto tg = run_gd(p, gd.params.at("gamma"), 2000);
  const auto th = run_hb(p, hb.params.at("alpha"), hb.params.at("beta"), 2000);
  const auto tb = run_bgd(p, bgd.params.at("gamma1"), bgd.params.at("gamma2"), 2000);
  const double rg = asymptotic_rate(tg.errors).rho_hat, rh = asymptotic_rate(th.errors).rho_hat,
               rb = asymptotic_rate(tb.errors).rho_hat;
  auto rel = [](double a, double b) { return std::abs(a - b) / b; };
  const double eg = rel(rg, gd.predicted_rho), eh = rel(rh, hb.predicted_rho), eb = rel(rb, bgd.predicted_rho);

  // Ordering is judged where at least one of the compared errors is above the
  // rounding floor; below it both traces are noise around zero.
  const double floor = kConvergedFloor * tg.errors[0];
  std::size_t raw = 0, resolved = 0, floored = 0;
  for (std::size_t t = 200; t < tg.errors.size(); ++t) {
    const double g = tg.errors[t], h = th.errors[t], b = tb.errors[t];
    const bool bad_bh = b > h, bad_hg = h > g;
    if (bad_bh || bad_hg) ++raw;
    const bool real_bh = bad_bh && b > floor, real_hg = bad_hg && h > floor;
    if (real_bh || real_hg)
      ++resolved;
    else if (bad_bh || bad_hg)
      ++floored;
  }
  Outcome o;
  o.pass = eg <= 0.05 && eh <= 0.05 && eb <= 0.05 && resolved == 0;
  o.detail = fmt("measured/predicted gd %.6f/%.6f hb %.6f/%.6f ", rg, gd.predicted_rho, rh, hb.predicted_rho) +
             fmt("bgd %.6f/%.6f (rel err %.3f, ", rb, bgd.predicted_rho, std::max({eg, eh, eb})) +
             fmt("tol 0.05); ordering violations for t >= 200: %.0f above the floor %.2e, %.0f at the floor (raw %.0f)",
                 double(resolved), floor, double(floored), double(raw));
  return o;
}

Outcome criterion5() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> gam(0.05, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    GenSpec spec;
    spec.n1 = 1 + rng() % 8;
    spec.n2 = 1 + rng() % 8;
    spec.m = spec.n1 + spec.n2 + rng() % 10;
    spec.cond_num = 1.5 + static_cast<double>(rng() % 1000);
    spec.seed = rng();
    const auto p = gen_instance(spec);
    const double g1 = gam(rng), g2 = gam(rng);
    const Vector x = testing::gaussian(p.n(), 1, rng()).col(0);
    const Vector e = x - p.xstar();
    const Vector lhs = bgd_step(p, g1, g2, x) - p.xstar();
    const double general = (lhs - build_m(p, g1, g2) * e).norm() / e.norm();
    const double block = (lhs - build_m_block_form(p.c(), g1, g2) * e).norm() / e.norm();
    worst = std::max({worst, general, block});
  }
  return {worst <= 1e-10, fmt("max ||(x+ - x*) - M (x - x*)|| / ||x - x*|| = %.2e (tol 1e-10)", worst)};
}

Outcome criterion6() {
  const auto p = gen_two_column(0.6, 1);
  const auto unit = run_bgd(p, 1.0, 1.0, 60);
  const double rate = asymptotic_rate(unit.errors).rho_hat;
  const double g2 = 1.0 / (1.0 - 0.36);
  const auto gs = run_bgd(p, 1.0, g2, 2);
  const double l[] = {0.36};
  const double rho = closed_form_spectrum(l, 1, 1, 1.0, g2).rho;
  Outcome o;
  o.pass = std::abs(rate - 0.36) <= 0.05 * 0.36 && gs.errors[2] <= 1e-10 * gs.errors[0] && rho == 0.0;
  o.detail = fmt("unit steps measured rate %.6f (target 0.36), tuned steps error ratio after 2 sweeps %.2e, closed-form rho %.3g",
                 rate, gs.errors[2] / gs.errors[0], rho);
  return o;
}

Outcome criterion7() {
  const std::pair<double, double> cases[] = {{kPi / 6, kPi / 3}, {kPi / 6, kPi / 2}, {kPi / 4, 5 * kPi / 12}};
  Outcome o;
  std::string detail;
  std::uint64_t seed = 31;
  for (const auto& [t1, tr] : cases) {
    const std::vector<double> angles = {t1, tr};
    const auto pair = gen_subspace_pair(8, 2, 2, angles, seed++);
    const auto params = tabulated_params(pair, ProjKind::GAP, true);
    const auto op = make_operator(pair, ProjKind::GAP, params);
    const Vector z0 = testing::gaussian(pair.m(), 1, seed++).col(0);
    const double measured = measure_contraction(pair, op, z0, 400).rho_hat;
    const double target = (std::sin(tr) - std::sin(t1)) / (std::sin(tr) + std::sin(t1));
    const double rel = std::abs(measured - target) / target;
    if (rel > 0.05) o.pass = false;
    detail += fmt("(%.4f, %.4f): %.5f vs %.5f; ", t1, tr, measured, target);
  }
  std::size_t dominance_fail = 0;
  const int n = 50;
  for (int i = 1; i <= n; ++i)
    for (int j = i; j <= n; ++j) {
      const auto t = rate_table((kPi / 2) * i / n, (kPi / 2) * j / n);
      for (double v : {t.ap, t.dr, t.rap, t.prap, t.gdr, t.gap})
        if (t.gapxx > v + 1e-12) ++dominance_fail;
    }
  if (dominance_fail) o.pass = false;
  o.detail = detail + fmt("dominance failures on the 50x50 grid: %.0f", double(dominance_fail));
  return o;
}

Outcome criterion8() {
  Outcome o;
  for (double kappa : {10.0, 1e3, 1e5}) {
    GenSpec spec;
    spec.cond_num = kappa;
    const auto p = gen_instance(spec);
    const Vector ev = sym_eigvals(p.gram());
    const double measured = ev.maxCoeff() / ev.minCoeff();
    const double rel = std::abs(measured - kappa) / kappa;
    const auto v = validate(p);
    const double dev = std::max(v.gram_dev1, v.gram_dev2);
    if (rel > 1e-6 || dev > 1e-10) o.pass = false;
    o.detail += fmt("kappa %.0e: measured %.10g (rel %.1e), gram dev %.1e; ", kappa, measured, rel, dev);
  }
  return o;
}

Outcome criterion9() {
  std::size_t mono_fail = 0, idem_fail = 0, tail_fail = 0, rng_fail = 0, tail_runs = 0;
  for (double lambda : {0.1, 0.5, 0.9}) {
    // S00 = (0,1]^2, S01 = (0,1] x [1,inf), S10 = [1,inf) x (0,1]
    for (int i = 1; i <= 100; ++i) {
      const double fixed = 0.01 * i;
      double p00 = INFINITY, q00 = INFINITY;
      for (int j = 1; j <= 100; ++j) {
        const double v = 0.01 * j;
        const double a = quadratic_root_magnitudes(fixed, v, lambda), b = quadratic_root_magnitudes(v, fixed, lambda);
        if (a > p00 + 1e-12 || b > q00 + 1e-12) ++mono_fail;
        p00 = a;
        q00 = b;
      }
    }
    for (double fixed : {1.0, 1.25, 1.5, 2.0, 3.0}) {
      double p01 = INFINITY, p10 = INFINITY;
      for (int j = 1; j <= 100; ++j) {
        const double v = 0.01 * j;
        const double a = quadratic_root_magnitudes(v, fixed, lambda), b = quadratic_root_magnitudes(fixed, v, lambda);
        if (a > p01 + 1e-12 || b > p10 + 1e-12) ++mono_fail;
        p01 = a;
        p10 = b;
      }
    }
  }

  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto pair = gen_subspace_pair(10, 1 + s % 4, 1 + (s / 4) % 4, std::nullopt, s);
    for (const Matrix* a : {&pair.a1, &pair.a2}) {
      const Matrix pr = relaxed_projection(*a, 1.0);
      if (testing::max_abs(pr * pr - pr) > 1e-12) ++idem_fail;
    }
  }

  std::mt19937_64 rng(404);
  std::size_t tail_fail_by[3] = {0, 0, 0};
  for (int i = 0; i < 60; ++i) {
    GenSpec spec;
    spec.n1 = 1 + rng() % 40;
    spec.n2 = 1 + rng() % 40;
    spec.m = spec.n1 + spec.n2 + rng() % 20;
    spec.cond_num = std::exp(std::uniform_real_distribution<double>(std::log(2.0), std::log(1e5))(rng));
    spec.seed = rng();
    const auto p = gen_instance(spec);
    const auto gd = optimal_plan(p, Method::GD), hb = optimal_plan(p, Method::HB), bgd = optimal_plan(p, Method::BGD);
    const SolverTrace traces[] = {run_gd(p, gd.params.at("gamma"), 3000),
                                  run_hb(p, hb.params.at("alpha"), hb.params.at("beta"), 3000),
                                  run_bgd(p, bgd.params.at("gamma1"), bgd.params.at("gamma2"), 3000)};
    for (int k = 0; k < 3; ++k) {
      ++tail_runs;
      if (testing::tail_ratio(traces[k].errors) >= 1.0) {
        ++tail_fail;
        ++tail_fail_by[k];
      }
    }
  }

  for (std::uint64_t seed : {1ull, 99ull, 123456789ull}) {
    auto csv = [&] {
      GenSpec spec;
      spec.m = 50;
      spec.n1 = 10;
      spec.n2 = 12;
      spec.seed = seed;
      const auto p = gen_instance(spec);
      const auto plan = optimal_plan(p, Method::BGD);
      auto t = run_bgd(p, plan.params.at("gamma1"), plan.params.at("gamma2"), 100);
      t.seed = seed;
      return trace_to_csv(t);
    };
    if (csv() != csv()) ++rng_fail;
  }
  Outcome o;
  o.pass = mono_fail == 0 && idem_fail == 0 && tail_fail == 0 && rng_fail == 0;
  o.detail = fmt("monotonicity violations %.0f, idempotence failures %.0f, ", double(mono_fail), double(idem_fail)) +
             fmt("non-increase failures %.0f of %.0f traces (gd %.0f, hb %.0f, ", double(tail_fail), double(tail_runs),
                 double(tail_fail_by[0]), double(tail_fail_by[1])) +
             fmt("bgd %.0f; final tenth before the rounding floor), CSV mismatches %.0f", double(tail_fail_by[2]),
                 double(rng_fail));
  return o;
}

}  // namespace

int main() {
  std::size_t redrawn = 0;
  const auto corpus = spectrum_corpus(50, 5150, &redrawn);
  report(1, "closed-form spectrum against the characteristic polynomial", 30, criterion1);
  report(2, "optimal BGD stepsizes against the grid oracle", 120, [&] { return criterion2(corpus, redrawn); });
  report(3, "BGD rate below heavy-ball squared", 0, [&] { return criterion3(corpus); });
  report(4, "convergence rates on the m=200 instance", 10, criterion4);
  report(5, "one sweep equals multiplication by M", 0, criterion5);
  report(6, "two-column Gauss-Seidel example", 0, criterion6);
  report(7, "GAP++ contraction and rate dominance", 0, criterion7);
  report(8, "generator condition number and block Grams", 0, criterion8);
  report(9, "property suite", 0, criterion9);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures ? 1 : 0;
}
