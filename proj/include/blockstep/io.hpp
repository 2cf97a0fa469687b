#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockstep/model.hpp"
#include "blockstep/spectrum.hpp"

namespace blockstep {

nlohmann::json problem_to_json(const BlockProblem& p);
BlockProblem problem_from_json(const nlohmann::json& j);

BlockProblem load_problem(const std::string& path);
void save_problem(const BlockProblem& p, const std::string& path);

nlohmann::json plan_to_json(const StepsizePlan& plan);
nlohmann::json spectrum_to_json(const SpectrumReport& report);

inline constexpr const char* kTraceHeader = "iter,error,method,gamma1,gamma2,alpha,beta,seed";

void write_trace_csv(std::ostream& os, const SolverTrace& trace, bool header = true);
std::string trace_to_csv(const SolverTrace& trace);

struct TraceRow {
  std::size_t iter = 0;
  double error = 0.0;
  std::string method;
  std::string gamma1, gamma2, alpha, beta, seed;
};

/// Parses trace CSV, checking the header and column count. Throws Parse.
std::vector<TraceRow> read_trace_csv(std::istream& is);

}  // namespace blockstep
