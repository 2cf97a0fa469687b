#include "blockstep/blockstep.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "blockstep/altproj.hpp"
#include "blockstep/datagen.hpp"
#include "blockstep/error.hpp"
#include "blockstep/io.hpp"
#include "blockstep/solvers.hpp"
#include "blockstep/spectrum.hpp"
#include "blockstep/stepsizes.hpp"

namespace bs = blockstep;

struct bs_problem {
  bs::BlockProblem value;
};
struct bs_trace {
  bs::SolverTrace value;
};
struct bs_pair {
  bs::SubspacePair value;
};

namespace {

thread_local std::string g_last_error;

bs_status from_code(bs::ErrorCode c) {
  switch (c) {
    case bs::ErrorCode::BadShape: return BS_BAD_SHAPE;
    case bs::ErrorCode::RankDeficient: return BS_RANK_DEFICIENT;
    case bs::ErrorCode::NotSymmetric: return BS_NOT_SYMMETRIC;
    case bs::ErrorCode::Singular: return BS_SINGULAR;
    case bs::ErrorCode::BadStepsize: return BS_BAD_STEPSIZE;
    case bs::ErrorCode::OutOfRange: return BS_OUT_OF_RANGE;
    case bs::ErrorCode::BadSpectrum: return BS_BAD_SPECTRUM;
    case bs::ErrorCode::TooFew: return BS_TOO_FEW;
    case bs::ErrorCode::NotBWO: return BS_NOT_BWO;
    case bs::ErrorCode::NotOrthonormal: return BS_NOT_ORTHONORMAL;
    case bs::ErrorCode::InsufficientTail: return BS_INSUFFICIENT_TAIL;
    case bs::ErrorCode::Io: return BS_IO;
    case bs::ErrorCode::Parse: return BS_PARSE;
  }
  return BS_INTERNAL;
}

bs_status fail(bs_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

struct InvalidArgument : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

template <class F>
bs_status call(F&& f) {
  try {
    g_last_error.clear();
    f();
    return BS_OK;
  } catch (const InvalidArgument& e) {
    return fail(BS_INVALID_ARGUMENT, e.what());
  } catch (const bs::Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(BS_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BS_INTERNAL, e.what());
  } catch (...) {
    return fail(BS_INTERNAL, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

bs::Method to_method(bs_method m) {
  require(m >= BS_GD && m <= BS_GAPXX, "unknown method");
  return static_cast<bs::Method>(m);
}

bs::StepsizePlan to_plan(const bs_plan& plan) {
  bs::StepsizePlan out;
  out.method = to_method(plan.method);
  out.predicted_rho = plan.predicted_rho;
  switch (plan.method) {
    case BS_GD: out.params["gamma"] = plan.gamma; break;
    case BS_HB:
      out.params["alpha"] = plan.alpha;
      out.params["beta"] = plan.beta;
      break;
    case BS_BGD:
    case BS_BEM:
      out.params["gamma1"] = plan.gamma1;
      out.params["gamma2"] = plan.gamma2;
      break;
    default: throw InvalidArgument("plans cover gd, hb, bgd and bem only");
  }
  return out;
}

double param(const bs::StepsizePlan& p, const char* key) {
  auto it = p.params.find(key);
  return it == p.params.end() ? 0.0 : it->second;
}

bs::ProjKind to_kind(bs_method m) {
  switch (m) {
    case BS_AP: return bs::ProjKind::AP;
    case BS_DR: return bs::ProjKind::DR;
    case BS_RAP: return bs::ProjKind::RAP;
    case BS_PRAP: return bs::ProjKind::PRAP;
    case BS_GDR: return bs::ProjKind::GDR;
    case BS_GAP:
    case BS_GAPXX: return bs::ProjKind::GAP;
    default: throw InvalidArgument("not a projection method");
  }
}

bs::ProjOperator pair_operator(const bs_pair* pair, bs_method method, const bs_proj_params* params) {
  const bs::ProjKind kind = to_kind(method);
  bs::ProjParams p;
  if (params) {
    p.gamma = params->gamma;
    p.gamma1 = params->gamma1;
    p.gamma2 = params->gamma2;
  } else {
    p = bs::tabulated_params(pair->value, kind, method == BS_GAPXX);
  }
  if (method == BS_GAPXX) p.gamma = 1.0;
  return bs::make_operator(pair->value, kind, p);
}

bs::Vector random_start(std::size_t m, std::uint64_t seed) {
  bs::Rng rng(seed);
  return bs::random_normal(m, 1, rng).col(0);
}

void fill_rate(const bs::RateEstimate& e, bs_rate* out) {
  out->rho_hat = e.rho_hat;
  out->window_begin = e.window_begin;
  out->window_end = e.window_end;
  out->residual = e.residual;
  out->diverging = e.diverging ? 1 : 0;
}

}  // namespace

extern "C" {

const char* bs_status_name(bs_status status) {
  switch (status) {
    case BS_OK: return "OK";
    case BS_INVALID_ARGUMENT: return "InvalidArgument";
    case BS_INTERNAL: return "Internal";
    default: break;
  }
  if (status > BS_OK && status < BS_INVALID_ARGUMENT) {
    static const char* names[] = {"",         "BadShape",    "RankDeficient", "NotSymmetric",   "Singular",
                                  "BadStepsize", "OutOfRange", "BadSpectrum", "TooFew",        "NotBWO",
                                  "NotOrthonormal", "InsufficientTail", "Io", "Parse"};
    return names[status];
  }
  return "Unknown";
}

const char* bs_last_error(void) { return g_last_error.c_str(); }

void bs_string_free(char* s) { std::free(s); }

const char* bs_method_name(bs_method method) {
  if (method < BS_GD || method > BS_GAPXX) return "?";
  return bs::to_string(static_cast<bs::Method>(method)).data();
}

bs_status bs_method_from_name(const char* name, bs_method* out) {
  return call([&] {
    require(name && out, "null argument");
    *out = static_cast<bs_method>(bs::method_from_string(name));
  });
}

void bs_gen_spec_default(bs_gen_spec* spec) {
  if (!spec) return;
  const bs::GenSpec d;
  spec->m = d.m;
  spec->n1 = d.n1;
  spec->n2 = d.n2;
  spec->noise_level = d.noise_level;
  spec->cond_num = d.cond_num;
  spec->seed = d.seed;
  spec->rank = 0;
}

bs_status bs_problem_generate(const bs_gen_spec* spec, bs_problem** out) {
  return call([&] {
    require(spec && out, "null argument");
    bs::GenSpec g;
    g.m = spec->m;
    g.n1 = spec->n1;
    g.n2 = spec->n2;
    g.noise_level = spec->noise_level;
    g.cond_num = spec->cond_num;
    g.seed = spec->seed;
    if (spec->rank != 0) g.rank = spec->rank;
    *out = new bs_problem{bs::gen_instance(g)};
  });
}

bs_status bs_problem_two_column(double c, uint64_t seed, bs_problem** out) {
  return call([&] {
    require(out, "null argument");
    *out = new bs_problem{bs::gen_two_column(c, seed)};
  });
}

bs_status bs_problem_create(size_t m, size_t n1, size_t n2, const double* a1, const double* a2, const double* y,
                            const uint64_t* seed, bs_problem** out) {
  return call([&] {
    require(a1 && a2 && y && out, "null argument");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto rows = static_cast<Eigen::Index>(m);
    bs::Matrix b1 = Eigen::Map<const RowMajor>(a1, rows, static_cast<Eigen::Index>(n1));
    bs::Matrix b2 = Eigen::Map<const RowMajor>(a2, rows, static_cast<Eigen::Index>(n2));
    bs::Vector v = Eigen::Map<const bs::Vector>(y, rows);
    std::optional<std::uint64_t> s;
    if (seed) s = *seed;
    *out = new bs_problem{bs::BlockProblem::create(std::move(b1), std::move(b2), std::move(v), s)};
  });
}

bs_status bs_problem_load(const char* path, bs_problem** out) {
  return call([&] {
    require(path && out, "null argument");
    *out = new bs_problem{bs::load_problem(path)};
  });
}

bs_status bs_problem_from_json(const char* text, bs_problem** out) {
  return call([&] {
    require(text && out, "null argument");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw bs::Error(bs::ErrorCode::Parse, e.what());
    }
    *out = new bs_problem{bs::problem_from_json(j)};
  });
}

bs_status bs_problem_save(const bs_problem* p, const char* path) {
  return call([&] {
    require(p && path, "null argument");
    bs::save_problem(p->value, path);
  });
}

bs_status bs_problem_to_json(const bs_problem* p, char** out) {
  return call([&] {
    require(p && out, "null argument");
    *out = dup_string(bs::problem_to_json(p->value).dump());
  });
}

bs_status bs_problem_info_get(const bs_problem* p, bs_problem_info* out) {
  return call([&] {
    require(p && out, "null argument");
    const auto& v = p->value.validation();
    out->m = p->value.m();
    out->n1 = p->value.n1();
    out->n2 = p->value.n2();
    out->r = v.r;
    out->assumes_bwo = v.assumes_bwo ? 1 : 0;
    out->gram_dev1 = v.gram_dev1;
    out->gram_dev2 = v.gram_dev2;
    out->lambda1 = p->value.lambda1();
    out->ata_max = v.ata_max;
    out->ata_min = v.ata_min;
    out->kappa = v.kappa;
    out->has_seed = p->value.seed() ? 1 : 0;
    out->seed = p->value.seed().value_or(0);
  });
}

bs_status bs_problem_lambdas(const bs_problem* p, double* out, size_t cap, size_t* count) {
  return call([&] {
    require(p && count && (out || cap == 0), "null argument");
    const auto& l = p->value.lambdas_cc();
    *count = static_cast<size_t>(l.size());
    for (size_t i = 0; i < cap && i < *count; ++i) out[i] = l[static_cast<Eigen::Index>(i)];
  });
}

void bs_problem_free(bs_problem* p) { delete p; }

bs_status bs_plan_optimal(const bs_problem* p, bs_method method, bs_plan* out) {
  return call([&] {
    require(p && out, "null argument");
    require(method == BS_GD || method == BS_HB || method == BS_BGD || method == BS_BEM,
            "plans cover gd, hb, bgd and bem only");
    const auto plan = bs::optimal_plan(p->value, to_method(method));
    *out = bs_plan{};
    out->method = method;
    out->gamma = param(plan, "gamma");
    out->alpha = param(plan, "alpha");
    out->beta = param(plan, "beta");
    out->gamma1 = param(plan, "gamma1");
    out->gamma2 = param(plan, "gamma2");
    out->predicted_rho = plan.predicted_rho;
  });
}

bs_status bs_plan_evaluate(const bs_problem* p, bs_plan* plan) {
  return call([&] {
    require(p && plan, "null argument");
    plan->predicted_rho = bs::predicted_rho(p->value, to_plan(*plan));
  });
}

bs_status bs_plan_to_json(const bs_plan* plan, char** out) {
  return call([&] {
    require(plan && out, "null argument");
    *out = dup_string(bs::plan_to_json(to_plan(*plan)).dump());
  });
}

bs_status bs_spectrum_json(const bs_problem* p, double gamma1, double gamma2, char** out) {
  return call([&] {
    require(p && out, "null argument");
    if (!p->value.assumes_bwo()) {
      throw bs::Error(bs::ErrorCode::NotBWO, "closed-form spectrum needs orthonormal blocks with nonzero C");
    }
    const auto& l = p->value.lambdas_cc();
    const auto report = bs::closed_form_spectrum(std::span<const double>(l.data(), static_cast<size_t>(l.size())),
                                                 p->value.n1(), p->value.n2(), gamma1, gamma2);
    *out = dup_string(bs::spectrum_to_json(report).dump());
  });
}

bs_status bs_solve(const bs_problem* p, const bs_plan* plan, size_t iters, bs_trace** out) {
  return call([&] {
    require(p && plan && out, "null argument");
    bs::SolverTrace t;
    switch (plan->method) {
      case BS_GD: t = bs::run_gd(p->value, plan->gamma, iters); break;
      case BS_HB: t = bs::run_hb(p->value, plan->alpha, plan->beta, iters); break;
      case BS_BGD: t = bs::run_bgd(p->value, plan->gamma1, plan->gamma2, iters); break;
      case BS_BEM: t = bs::run_bem(p->value, iters); break;
      default: throw InvalidArgument("bs_solve handles gd, hb, bgd and bem");
    }
    t.seed = p->value.seed();
    *out = new bs_trace{std::move(t)};
  });
}

bs_status bs_solve_block_qr(const bs_problem* p, size_t iters, bs_trace** out, double* residual_gap) {
  return call([&] {
    require(p && out, "null argument");
    auto sol = bs::solve_via_block_qr(p->value.a1(), p->value.a2(), p->value.y(), iters);
    if (residual_gap) {
      const bs::Matrix a = p->value.a();
      const double mine = (a * sol.x - p->value.y()).norm();
      const double direct = (a * p->value.xstar() - p->value.y()).norm();
      *residual_gap = std::abs(mine - direct);
    }
    sol.trace.seed = p->value.seed();
    *out = new bs_trace{std::move(sol.trace)};
  });
}

size_t bs_trace_length(const bs_trace* t) { return t ? t->value.errors.size() : 0; }

const double* bs_trace_errors(const bs_trace* t) { return t ? t->value.errors.data() : nullptr; }

double bs_trace_wall_seconds(const bs_trace* t) { return t ? t->value.wall_seconds : 0.0; }

void bs_trace_set_seed(bs_trace* t, uint64_t seed) {
  if (t) t->value.seed = seed;
}

void bs_trace_set_method(bs_trace* t, bs_method method) {
  if (t && method >= BS_GD && method <= BS_GAPXX) t->value.method = static_cast<bs::Method>(method);
}

bs_status bs_trace_rate(const bs_trace* t, double window_fraction, bs_rate* out) {
  return call([&] {
    require(t && out, "null argument");
    fill_rate(bs::asymptotic_rate(t->value.errors, window_fraction), out);
  });
}

bs_status bs_trace_to_csv(const bs_trace* t, int header, char** out) {
  return call([&] {
    require(t && out, "null argument");
    std::ostringstream os;
    bs::write_trace_csv(os, t->value, header != 0);
    *out = dup_string(os.str());
  });
}

bs_status bs_trace_csv_validate(const char* text, size_t* rows) {
  return call([&] {
    require(text, "null argument");
    std::istringstream is(text);
    const auto parsed = bs::read_trace_csv(is);
    if (rows) *rows = parsed.size();
  });
}

void bs_trace_free(bs_trace* t) { delete t; }

bs_status bs_pair_generate(size_t m, size_t n1, size_t n2, const double* angles, size_t n_angles, uint64_t seed,
                           bs_pair** out) {
  return call([&] {
    require(out, "null argument");
    std::optional<std::vector<double>> a;
    if (angles) a = std::vector<double>(angles, angles + n_angles);
    *out = new bs_pair{bs::gen_subspace_pair(m, n1, n2, a, seed)};
  });
}

bs_status bs_pair_angles(const bs_pair* pair, double* out, size_t cap, size_t* count) {
  return call([&] {
    require(pair && count && (out || cap == 0), "null argument");
    const auto& th = pair->value.thetas;
    *count = th.size();
    for (size_t i = 0; i < cap && i < th.size(); ++i) out[i] = th[i];
  });
}

size_t bs_pair_rank(const bs_pair* pair) { return pair ? pair->value.r : 0; }

int bs_pair_full_rank(const bs_pair* pair) { return pair && pair->value.full_rank() ? 1 : 0; }

bs_status bs_pair_tabulated(const bs_pair* pair, bs_method method, bs_proj_params* params, double* rate) {
  return call([&] {
    require(pair, "null argument");
    const auto p = bs::tabulated_params(pair->value, to_kind(method), method == BS_GAPXX);
    if (params) {
      params->gamma = method == BS_GAPXX ? 1.0 : p.gamma;
      params->gamma1 = p.gamma1;
      params->gamma2 = p.gamma2;
    }
    if (rate) {
      const auto& th = pair->value.thetas;
      if (th.empty() || pair->value.r == 0) throw bs::Error(bs::ErrorCode::OutOfRange, "no nonzero principal angle");
      const auto t = bs::rate_table(th.front(), th[pair->value.r - 1]);
      switch (method) {
        case BS_AP: *rate = t.ap; break;
        case BS_DR: *rate = t.dr; break;
        case BS_RAP: *rate = t.rap; break;
        case BS_PRAP: *rate = t.prap; break;
        case BS_GDR: *rate = t.gdr; break;
        case BS_GAP: *rate = t.gap; break;
        default: *rate = pair->value.full_rank() ? t.gapxx : t.gap; break;
      }
    }
  });
}

bs_status bs_pair_run(const bs_pair* pair, bs_method method, const bs_proj_params* params, size_t iters,
                      uint64_t z0_seed, bs_trace** out) {
  return call([&] {
    require(pair && out, "null argument");
    const auto op = pair_operator(pair, method, params);
    auto t = bs::run_projection(pair->value, op, random_start(pair->value.m(), z0_seed), iters);
    t.method = static_cast<bs::Method>(method);
    t.seed = z0_seed;
    *out = new bs_trace{std::move(t)};
  });
}

bs_status bs_pair_contraction(const bs_pair* pair, bs_method method, const bs_proj_params* params, size_t iters,
                              uint64_t z0_seed, bs_rate* out) {
  return call([&] {
    require(pair && out, "null argument");
    const auto op = pair_operator(pair, method, params);
    fill_rate(bs::measure_contraction(pair->value, op, random_start(pair->value.m(), z0_seed), iters), out);
  });
}

void bs_pair_free(bs_pair* pair) { delete pair; }

bs_status bs_rate_table_compute(double theta1, double theta_r, bs_rate_table* out) {
  return call([&] {
    require(out, "null argument");
    const auto t = bs::rate_table(theta1, theta_r);
    *out = bs_rate_table{t.ap, t.dr, t.rap, t.prap, t.gdr, t.gap, t.gapxx};
  });
}

}  // extern "C"
