#include "blockstep/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "blockstep/error.hpp"

namespace blockstep {

using nlohmann::json;

namespace {

json flatten(const Matrix& a) {
  json out = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.push_back(a(i, j));
  return out;
}

Matrix unflatten(const json& arr, std::size_t rows, std::size_t cols, const char* name) {
  if (!arr.is_array() || arr.size() != rows * cols) {
    throw Error(ErrorCode::BadShape, std::string(name) + " must be a flat array of " + std::to_string(rows * cols) + " numbers");
  }
  Matrix a(rows, cols);
  std::size_t k = 0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const auto& v = arr[k++];
      if (!v.is_number()) throw Error(ErrorCode::Parse, std::string(name) + " has a non-numeric entry");
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v.get<double>();
    }
  return a;
}

std::size_t count_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) {
    throw Error(ErrorCode::Parse, std::string("missing or invalid field '") + key + "'");
  }
  return j[key].get<std::size_t>();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

json problem_to_json(const BlockProblem& p) {
  json j;
  j["m"] = p.m();
  j["n1"] = p.n1();
  j["n2"] = p.n2();
  j["A1"] = flatten(p.a1());
  j["A2"] = flatten(p.a2());
  j["y"] = flatten(p.y());
  j["seed"] = p.seed() ? json(*p.seed()) : json(nullptr);
  return j;
}

BlockProblem problem_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "instance must be a JSON object");
  const auto m = count_field(j, "m");
  const auto n1 = count_field(j, "n1");
  const auto n2 = count_field(j, "n2");
  for (const char* key : {"A1", "A2", "y"}) {
    if (!j.contains(key)) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  }
  Matrix a1 = unflatten(j["A1"], m, n1, "A1");
  Matrix a2 = unflatten(j["A2"], m, n2, "A2");
  Vector y = unflatten(j["y"], m, 1, "y");
  std::optional<std::uint64_t> seed;
  if (j.contains("seed") && !j["seed"].is_null()) {
    if (!j["seed"].is_number_integer()) throw Error(ErrorCode::Parse, "seed must be an integer or null");
    seed = j["seed"].get<std::uint64_t>();
  }
  return BlockProblem::create(std::move(a1), std::move(a2), std::move(y), seed);
}

BlockProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
  return problem_from_json(j);
}

void save_problem(const BlockProblem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << problem_to_json(p).dump() << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

json plan_to_json(const StepsizePlan& plan) {
  json params = json::object();
  for (const auto& [k, v] : plan.params) params[k] = v;
  return {{"method", std::string(to_string(plan.method))}, {"params", params}, {"predicted_rho", plan.predicted_rho}};
}

json spectrum_to_json(const SpectrumReport& report) {
  json eigs = json::array();
  for (const auto& e : report.eigs) eigs.push_back({{"re", e.re}, {"im", e.im}, {"mult", e.multiplicity}});
  return {{"case", std::string(to_string(report.spectrum_case))},
          {"rho", report.rho},
          {"eigs", eigs},
          {"n1", report.n1},
          {"n2", report.n2},
          {"r", report.r}};
}

void write_trace_csv(std::ostream& os, const SolverTrace& trace, bool header) {
  if (header) os << kTraceHeader << '\n';
  const std::string method(to_string(trace.method));
  const std::string tail = "," + method + "," + opt(trace.gamma1) + "," + opt(trace.gamma2) + "," + opt(trace.alpha) +
                           "," + opt(trace.beta) + "," + (trace.seed ? std::to_string(*trace.seed) : std::string());
  for (std::size_t t = 0; t < trace.errors.size(); ++t) {
    os << t << ',' << fmt(trace.errors[t]) << tail << '\n';
  }
}

std::string trace_to_csv(const SolverTrace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

std::vector<TraceRow> read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::Parse, "empty trace CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw Error(ErrorCode::Parse, "unexpected trace header: " + line);
  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8) throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": expected 8 fields");
    TraceRow row;
    try {
      std::size_t used = 0;
      row.iter = std::stoul(f[0], &used);
      if (used != f[0].size()) throw std::invalid_argument("iter");
      row.error = std::stod(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument("error");
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": bad iter or error field");
    }
    if (row.iter != rows.size()) throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": iter out of sequence");
    if (!(row.error >= 0.0) || !std::isfinite(row.error)) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": error must be finite and nonnegative");
    }
    row.method = f[2];
    method_from_string(row.method);
    row.gamma1 = f[3];
    row.gamma2 = f[4];
    row.alpha = f[5];
    row.beta = f[6];
    row.seed = f[7];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace blockstep
