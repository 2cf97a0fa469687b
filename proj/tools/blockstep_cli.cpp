// blockstep command-line driver. Talks to the library only through blockstep.h.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "blockstep/blockstep.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct CliFailure {
  int code;
  std::string message;
};

int exit_code_for(bs_status s) {
  switch (s) {
    case BS_OK: return kExitOk;
    case BS_IO:
    case BS_PARSE:
    case BS_INVALID_ARGUMENT: return kExitUsage;
    case BS_INTERNAL: return kExitInternal;
    default: return kExitNumerical;
  }
}

void check(bs_status s) {
  if (s != BS_OK) {
    std::string msg = bs_last_error();
    if (msg.rfind(bs_status_name(s), 0) != 0) msg = std::string(bs_status_name(s)) + ": " + msg;
    throw CliFailure{exit_code_for(s), msg};
  }
}

[[noreturn]] void usage_error(const std::string& msg) { throw CliFailure{kExitUsage, msg}; }

struct ProblemDeleter {
  void operator()(bs_problem* p) const { bs_problem_free(p); }
};
struct TraceDeleter {
  void operator()(bs_trace* t) const { bs_trace_free(t); }
};
struct PairDeleter {
  void operator()(bs_pair* p) const { bs_pair_free(p); }
};
using ProblemPtr = std::unique_ptr<bs_problem, ProblemDeleter>;
using TracePtr = std::unique_ptr<bs_trace, TraceDeleter>;
using PairPtr = std::unique_ptr<bs_pair, PairDeleter>;

std::string take(char* s) {
  std::string out(s ? s : "");
  bs_string_free(s);
  return out;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("BLOCKSTEP_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    usage_error("BLOCKSTEP_SEED must be a nonnegative integer");
  }
  return 1;
}

ProblemPtr load(const std::string& path) {
  bs_problem* p = nullptr;
  check(bs_problem_load(path.c_str(), &p));
  return ProblemPtr(p);
}

bs_method method_named(const std::string& name) {
  bs_method m{};
  if (bs_method_from_name(name.c_str(), &m) != BS_OK) usage_error("unknown method '" + name + "'");
  return m;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliFailure{kExitUsage, "Io: cannot write " + path};
  out << text;
  if (!out) throw CliFailure{kExitUsage, "Io: write failed for " + path};
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double measured_rate(const bs_trace* t) {
  bs_rate r{};
  if (bs_trace_rate(t, 0.25, &r) != BS_OK) return std::nan("");
  return r.rho_hat;
}

// ---- gen ----

struct GenOptions {
  bs_gen_spec spec{};
  std::optional<std::uint64_t> seed;
  std::optional<double> two_column;
  std::string config;
  std::string out;
};

void apply_config(const std::string& path, bs_gen_spec& spec, std::optional<std::uint64_t>& seed) {
  std::ifstream in(path);
  if (!in) throw CliFailure{kExitUsage, "Io: cannot open " + path};
  nlohmann::json j;
  try {
    in >> j;
    if (j.contains("m")) spec.m = j["m"].get<std::size_t>();
    if (j.contains("n1")) spec.n1 = j["n1"].get<std::size_t>();
    if (j.contains("n2")) spec.n2 = j["n2"].get<std::size_t>();
    if (j.contains("noise_level")) spec.noise_level = j["noise_level"].get<double>();
    if (j.contains("cond_num")) spec.cond_num = j["cond_num"].get<double>();
    if (j.contains("rank")) spec.rank = j["rank"].get<std::size_t>();
    if (j.contains("seed") && !seed) seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw CliFailure{kExitUsage, std::string("Parse: ") + path + ": " + e.what()};
  }
}

int cmd_gen(GenOptions& o) {
  if (!o.config.empty()) apply_config(o.config, o.spec, o.seed);
  o.spec.seed = o.seed.value_or(default_seed());
  bs_problem* raw = nullptr;
  if (o.two_column) {
    check(bs_problem_two_column(*o.two_column, o.spec.seed, &raw));
  } else {
    check(bs_problem_generate(&o.spec, &raw));
  }
  ProblemPtr p(raw);
  check(bs_problem_save(p.get(), o.out.c_str()));
  bs_problem_info info{};
  check(bs_problem_info_get(p.get(), &info));
  nlohmann::json summary = {{"out", o.out},         {"m", info.m},        {"n1", info.n1},
                            {"n2", info.n2},        {"r", info.r},        {"assumes_bwo", info.assumes_bwo != 0},
                            {"lambda1", info.lambda1}, {"kappa", info.kappa}, {"seed", info.seed}};
  std::cout << summary.dump() << '\n';
  return kExitOk;
}

// ---- stepsizes / spectra ----

int cmd_stepsizes(const std::string& instance, const std::string& method) {
  auto p = load(instance);
  bs_plan plan{};
  check(bs_plan_optimal(p.get(), method_named(method), &plan));
  std::cout << take([&] {
    char* s = nullptr;
    check(bs_plan_to_json(&plan, &s));
    return s;
  }()) << '\n';
  return kExitOk;
}

int cmd_spectra(const std::string& instance, std::optional<double> g1, std::optional<double> g2, bool optimal) {
  auto p = load(instance);
  if (optimal) {
    bs_plan plan{};
    check(bs_plan_optimal(p.get(), BS_BGD, &plan));
    if (!g1) g1 = plan.gamma1;
    if (!g2) g2 = plan.gamma2;
  }
  if (!g1 || !g2) usage_error("spectra needs --gamma1 and --gamma2 (or --optimal)");
  char* s = nullptr;
  check(bs_spectrum_json(p.get(), *g1, *g2, &s));
  std::cout << take(s) << '\n';
  return kExitOk;
}

// ---- solve ----

struct SolveOptions {
  std::string instance;
  std::string method = "bgd";
  bool optimal = false;
  bool block_qr = false;
  std::optional<double> gamma, gamma1, gamma2, alpha, beta;
  std::size_t iters = 1000;
  std::string out;
};

int cmd_solve(const SolveOptions& o) {
  auto p = load(o.instance);
  const bs_method m = method_named(o.method);
  if (m != BS_GD && m != BS_HB && m != BS_BGD && m != BS_BEM) usage_error("solve handles gd, hb, bgd and bem");

  std::optional<double> optimal_rho;
  bs_plan plan{};
  plan.method = m;
  if (o.optimal || m == BS_BEM || o.block_qr) {
    check(bs_plan_optimal(p.get(), m, &plan));
    optimal_rho = plan.predicted_rho;
  }
  auto need = [&](const std::optional<double>& v, double& slot, const char* flag) {
    if (v) {
      slot = *v;
    } else if (!optimal_rho) {
      usage_error(std::string("missing ") + flag + " (or pass --optimal)");
    }
  };
  switch (m) {
    case BS_GD: need(o.gamma, plan.gamma, "--gamma"); break;
    case BS_HB:
      need(o.alpha, plan.alpha, "--alpha");
      need(o.beta, plan.beta, "--beta");
      break;
    case BS_BGD:
      need(o.gamma1, plan.gamma1, "--gamma1");
      need(o.gamma2, plan.gamma2, "--gamma2");
      break;
    default: break;
  }

  bs_trace* raw = nullptr;
  double residual_gap = std::nan("");
  if (o.block_qr) {
    if (m != BS_BGD) usage_error("--block-qr applies to bgd only");
    check(bs_solve_block_qr(p.get(), o.iters, &raw, &residual_gap));
  } else {
    check(bs_solve(p.get(), &plan, o.iters, &raw));
  }
  TracePtr trace(raw);

  char* csv = nullptr;
  check(bs_trace_to_csv(trace.get(), 1, &csv));
  emit(take(csv), o.out);

  nlohmann::json summary = {{"method", o.method}, {"iters", o.iters}, {"wall_seconds", bs_trace_wall_seconds(trace.get())}};
  if (!o.block_qr) {
    check(bs_plan_evaluate(p.get(), &plan));
    summary["predicted_rho"] = plan.predicted_rho;
  } else {
    summary["residual_gap"] = residual_gap;
  }
  if (optimal_rho) summary["optimal_rho"] = *optimal_rho;
  const double rate = measured_rate(trace.get());
  summary["measured_rho"] = std::isfinite(rate) ? nlohmann::json(rate) : nlohmann::json(nullptr);
  std::cerr << summary.dump() << '\n';
  return kExitOk;
}

// ---- sweep ----

struct SweepOptions {
  std::vector<std::string> cond_text;
  std::vector<double> conds;
  std::size_t iters = 2000;
  std::size_t m = 200, n1 = 40, n2 = 60, rank = 0;
  double noise = 0.01;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
  std::string out;
};

struct SweepRow {
  double kappa = 0.0;
  double rho[3] = {0, 0, 0};
  double measured[3] = {0, 0, 0};
  int status = kExitOk;
  std::string error;
};

SweepRow sweep_one(const SweepOptions& o, double kappa, std::uint64_t seed) {
  SweepRow row;
  row.kappa = kappa;
  try {
    bs_gen_spec spec{};
    spec.m = o.m;
    spec.n1 = o.n1;
    spec.n2 = o.n2;
    spec.noise_level = o.noise;
    spec.cond_num = kappa;
    spec.seed = seed;
    spec.rank = o.rank;
    bs_problem* raw = nullptr;
    check(bs_problem_generate(&spec, &raw));
    ProblemPtr p(raw);
    const bs_method methods[3] = {BS_GD, BS_HB, BS_BGD};
    for (int k = 0; k < 3; ++k) {
      bs_plan plan{};
      check(bs_plan_optimal(p.get(), methods[k], &plan));
      row.rho[k] = plan.predicted_rho;
      bs_trace* t = nullptr;
      check(bs_solve(p.get(), &plan, o.iters, &t));
      TracePtr trace(t);
      row.measured[k] = measured_rate(trace.get());
    }
  } catch (const CliFailure& f) {
    row.status = f.code;
    row.error = f.message;
  }
  return row;
}

int cmd_sweep(SweepOptions& o) {
  for (const auto& text : o.cond_text) {
    if (text.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
    }
    if (used != text.size() || used == 0) usage_error("--cond: not a number: '" + text + "'");
    o.conds.push_back(v);
  }
  if (o.conds.empty()) usage_error("sweep needs at least one --cond value");
  std::sort(o.conds.begin(), o.conds.end());
  const std::uint64_t seed = o.seed.value_or(default_seed());
  unsigned jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(o.conds.size()));

  std::vector<SweepRow> rows(o.conds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < o.conds.size(); i = next++) rows[i] = sweep_one(o, o.conds[i], seed);
  };
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "kappa,rho_gd,rho_hb,rho_bgd,measured_gd,measured_hb,measured_bgd\n";
  for (const auto& r : rows) {
    if (r.status != kExitOk) throw CliFailure{r.status, "kappa " + fmt(r.kappa) + ": " + r.error};
    csv << fmt(r.kappa);
    for (double v : r.rho) csv << ',' << fmt(v);
    for (double v : r.measured) csv << ',' << fmt(v);
    csv << '\n';
  }
  emit(csv.str(), o.out);
  return kExitOk;
}

// ---- gap ----

struct GapOptions {
  std::string angles;
  std::string angles_file;
  bool degrees = false;
  std::string method = "gapxx";
  std::size_t iters = 400;
  std::optional<std::size_t> m, n1, n2;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string table;
};

std::vector<double> parse_angles(const GapOptions& o) {
  std::string text = o.angles;
  if (!o.angles_file.empty()) {
    std::ifstream in(o.angles_file);
    if (!in) throw CliFailure{kExitUsage, "Io: cannot open " + o.angles_file};
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  std::vector<double> out;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_array() || j.empty()) usage_error("angles must be a nonempty JSON array");
    for (const auto& v : j) out.push_back(v.get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw CliFailure{kExitUsage, std::string("Parse: angles: ") + e.what()};
  }
  if (o.degrees) {
    for (double& v : out) v *= std::numbers::pi / 180.0;
  }
  return out;
}

int cmd_gap(const GapOptions& o) {
  if (o.angles.empty() == o.angles_file.empty()) usage_error("give exactly one of --angles or --angles-file");
  const auto angles = parse_angles(o);
  const bs_method m = method_named(o.method);
  if (m < BS_AP) usage_error("gap handles ap, dr, rap, prap, gdr, gap and gapxx");
  const std::size_t n1 = o.n1.value_or(angles.size());
  const std::size_t n2 = o.n2.value_or(angles.size());
  const std::size_t dim = o.m.value_or(n1 + n2 + 2);
  const std::uint64_t seed = o.seed.value_or(default_seed());

  bs_pair* raw = nullptr;
  check(bs_pair_generate(dim, n1, n2, angles.data(), angles.size(), seed, &raw));
  PairPtr pair(raw);

  bs_proj_params params{};
  double tabulated = 0.0;
  check(bs_pair_tabulated(pair.get(), m, &params, &tabulated));
  bs_trace* t = nullptr;
  check(bs_pair_run(pair.get(), m, &params, o.iters, seed, &t));
  TracePtr trace(t);
  char* csv = nullptr;
  check(bs_trace_to_csv(trace.get(), 1, &csv));
  emit(take(csv), o.out);

  std::vector<double> thetas(angles.size());
  std::size_t count = 0;
  check(bs_pair_angles(pair.get(), thetas.data(), thetas.size(), &count));
  thetas.resize(std::min(count, thetas.size()));
  const std::size_t r = bs_pair_rank(pair.get());
  if (r == 0 || thetas.empty()) throw CliFailure{kExitNumerical, "OutOfRange: subspaces share no nonzero angle"};
  bs_rate_table table{};
  check(bs_rate_table_compute(thetas.front(), thetas[r - 1], &table));
  if (!o.table.empty()) {
    std::ostringstream tcsv;
    tcsv << "theta1,theta_r,ap,dr,rap,prap,gdr,gap,gapxx\n"
         << fmt(thetas.front()) << ',' << fmt(thetas[r - 1]) << ',' << fmt(table.ap) << ',' << fmt(table.dr) << ','
         << fmt(table.rap) << ',' << fmt(table.prap) << ',' << fmt(table.gdr) << ',' << fmt(table.gap) << ','
         << fmt(table.gapxx) << '\n';
    emit(tcsv.str(), o.table);
  }

  bs_rate contraction{};
  const std::size_t power_iters = std::max<std::size_t>(o.iters, 40);
  check(bs_pair_contraction(pair.get(), m, &params, power_iters, seed, &contraction));
  nlohmann::json summary = {{"method", o.method},
                            {"gamma", params.gamma},
                            {"gamma1", params.gamma1},
                            {"gamma2", params.gamma2},
                            {"tabulated_rate", tabulated},
                            {"measured_rate", contraction.rho_hat},
                            {"full_rank", bs_pair_full_rank(pair.get()) != 0},
                            {"thetas", thetas}};
  std::cerr << summary.dump() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal stepsizes and experiments for two-block gradient descent"};
  app.require_subcommand(1);

  GenOptions gen;
  bs_gen_spec_default(&gen.spec);
  auto* g = app.add_subcommand("gen", "Generate a block-orthonormal least-squares instance");
  g->add_option("--m", gen.spec.m, "Rows")->capture_default_str();
  g->add_option("--n1", gen.spec.n1, "Columns of block 1")->capture_default_str();
  g->add_option("--n2", gen.spec.n2, "Columns of block 2")->capture_default_str();
  g->add_option("--cond", gen.spec.cond_num, "Condition number of A'A")->capture_default_str();
  g->add_option("--noise", gen.spec.noise_level, "Noise level")->capture_default_str();
  g->add_option("--rank", gen.spec.rank, "Rank of the cross Gram (0 = full)");
  g->add_option("--seed", gen.seed, "Seed (default: $BLOCKSTEP_SEED or 1)");
  g->add_option("--two-column", gen.two_column, "Two unit columns with inner product c instead");
  g->add_option("--config", gen.config, "JSON object with generator fields");
  g->add_option("--out", gen.out, "Output instance JSON")->required();

  std::string instance, method = "bgd";
  auto* st = app.add_subcommand("stepsizes", "Print the optimal stepsize plan as JSON");
  st->add_option("--instance", instance, "Instance JSON")->required();
  st->add_option("--method", method, "gd, hb, bgd or bem")->capture_default_str();

  std::optional<double> sg1, sg2;
  bool spec_optimal = false;
  auto* sp = app.add_subcommand("spectra", "Print the closed-form spectrum of the BGD error matrix");
  sp->add_option("--instance", instance, "Instance JSON")->required();
  sp->add_option("--gamma1", sg1, "Block-1 stepsize");
  sp->add_option("--gamma2", sg2, "Block-2 stepsize");
  sp->add_flag("--optimal", spec_optimal, "Use the optimal BGD stepsizes");

  SolveOptions solve;
  auto* so = app.add_subcommand("solve", "Run a solver and write its error trace as CSV");
  so->add_option("--instance", solve.instance, "Instance JSON")->required();
  so->add_option("--method", solve.method, "gd, hb, bgd or bem")->capture_default_str();
  so->add_flag("--optimal", solve.optimal, "Use optimal stepsizes; explicit values override");
  so->add_flag("--block-qr", solve.block_qr, "Orthogonalize raw blocks first, then run optimal BGD");
  so->add_option("--gamma", solve.gamma, "GD stepsize");
  so->add_option("--gamma1", solve.gamma1, "BGD block-1 stepsize");
  so->add_option("--gamma2", solve.gamma2, "BGD block-2 stepsize");
  so->add_option("--alpha", solve.alpha, "HB stepsize");
  so->add_option("--beta", solve.beta, "HB momentum");
  so->add_option("--iters", solve.iters, "Iterations")->capture_default_str()->check(CLI::PositiveNumber);
  so->add_option("--out", solve.out, "Trace CSV (default stdout)");

  SweepOptions sweep;
  auto* sw = app.add_subcommand("sweep", "Optimal rates and measured rates across condition numbers");
  sw->add_option("--cond", sweep.cond_text, "Condition numbers")->delimiter(',')->required();
  sw->add_option("--iters", sweep.iters, "Iterations per run")->capture_default_str()->check(CLI::PositiveNumber);
  sw->add_option("--m", sweep.m, "Rows")->capture_default_str();
  sw->add_option("--n1", sweep.n1, "Columns of block 1")->capture_default_str();
  sw->add_option("--n2", sweep.n2, "Columns of block 2")->capture_default_str();
  sw->add_option("--rank", sweep.rank, "Rank of the cross Gram (0 = full)");
  sw->add_option("--noise", sweep.noise, "Noise level")->capture_default_str();
  sw->add_option("--seed", sweep.seed, "Seed (default: $BLOCKSTEP_SEED or 1)");
  sw->add_option("--jobs", sweep.jobs, "Worker threads (default: logical cores)");
  sw->add_option("--out", sweep.out, "CSV output (default stdout)");

  GapOptions gap;
  auto* gp = app.add_subcommand("gap", "Run a projection method on a planted subspace pair");
  gp->add_option("--angles", gap.angles, "JSON array of principal angles");
  gp->add_option("--angles-file", gap.angles_file, "File holding the JSON array of angles");
  gp->add_flag("--degrees", gap.degrees, "Angles are in degrees (default radians)");
  gp->add_option("--method", gap.method, "ap, dr, rap, prap, gdr, gap or gapxx")->capture_default_str();
  gp->add_option("--iters", gap.iters, "Iterations")->capture_default_str()->check(CLI::PositiveNumber);
  gp->add_option("--m", gap.m, "Ambient dimension (default n1 + n2 + 2)");
  gp->add_option("--n1", gap.n1, "Dimension of complement 1 (default: number of angles)");
  gp->add_option("--n2", gap.n2, "Dimension of complement 2 (default: number of angles)");
  gp->add_option("--seed", gap.seed, "Seed (default: $BLOCKSTEP_SEED or 1)");
  gp->add_option("--out", gap.out, "Trace CSV (default stdout)");
  gp->add_option("--table", gap.table, "Rate-table CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*st) return cmd_stepsizes(instance, method);
    if (*sp) return cmd_spectra(instance, sg1, sg2, spec_optimal);
    if (*so) return cmd_solve(solve);
    if (*sw) return cmd_sweep(sweep);
    if (*gp) return cmd_gap(gap);
  } catch (const CliFailure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
