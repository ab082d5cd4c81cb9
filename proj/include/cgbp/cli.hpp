#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cgbp/apps.hpp"

namespace cgbp {

enum ExitCode { kExitSolved = 0, kExitInputError = 1, kExitInfeasible = 2, kExitLimit = 3 };

struct SolveOptions {
  std::string instance;
  std::string algorithm = "bp";  // cg | bp | oracle
  int beam_width = 0;            // 0: unlimited
  int max_iters = 500;
  double rc_tol = 1e-6;
  std::string node_strategy = "best_first";
  double time_limit = 0.0;
  std::uint64_t seed = 0;
  std::string out;    // report JSON; stdout when empty
  std::string trace;  // CSV: CG trace or BP bound history
};

struct GenOptions {
  std::string kind;
  std::uint64_t seed = 0;
  std::string out;  // stdout when empty
  CuttingStockGenParams cutting_stock;
  NetPathGenParams net_path;
};

// Runs one algorithm on an already parsed instance. Returns the report and
// the exit code it maps to.
std::pair<nlohmann::json, int> solve_instance(const Instance& instance, const SolveOptions& options,
                                              std::string* trace_csv = nullptr);

int cmd_solve(const SolveOptions& options);
int cmd_gen(const GenOptions& options);

// Full command line: `solve ...` or `gen ...`.
int run_cli(int argc, char** argv);

}  // namespace cgbp
