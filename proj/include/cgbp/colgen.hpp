#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cgbp/master.hpp"
#include "cgbp/pricing.hpp"

namespace cgbp {

struct CgConfig {
  double rc_tolerance = 1e-6;
  int max_iterations = 500;
  int columns_per_round = 5;
  bool heuristic_then_exact = true;
  double time_limit_s = 0.0;  // <= 0: none
  bool parallel_pricing = false;
};

enum class CgTermination {
  kConverged,
  kIterationCap,
  kTimeLimit,
  // Pricing kept returning columns already in the pool.
  kStalled,
  // Some convexity block has no point under the current bounds.
  kBlockInfeasible,
};

const char* to_string(CgTermination termination);

struct CgIteration {
  int iteration = 0;
  double lrmp_objective = 0.0;
  double best_reduced_cost = 0.0;
  // NaN when the round was not priced exactly.
  double lagrangian_lb = 0.0;
  int columns_added = 0;
  double wall_ms = 0.0;
  bool exact = false;
};

struct CgResult {
  double objective = 0.0;
  DualPrices duals;
  std::vector<double> weights;
  int iterations = 0;  // pricing rounds
  int columns_generated = 0;
  double lagrangian_lb = -kInf;  // best valid bound seen
  CgTermination termination = CgTermination::kConverged;
  // Artificial columns carry weight in the final LRMP: the original problem
  // is infeasible or the pool cannot yet express a feasible point.
  bool artificial_active = false;
  std::vector<CgIteration> trace;
  double wall_ms = 0.0;
};

// Solve the LRMP, price every block (heuristic first when
// enabled, exact when the heuristic finds nothing), add improving columns,
// repeat until an exact round certifies min reduced cost >= -rc_tolerance.
CgResult run_cg(RmpState& rmp, const PricerSet& pricers, const CgConfig& config = {});

// lrmp_objective + sum over convexity blocks of best_rc + sum over
// aggregated blocks of multiplicity * min(best_rc, 0). Throws
// std::logic_error when the values are not certified minima.
double lagrangian_bound(double lrmp_objective, const std::vector<double>& best_rc,
                        const std::vector<int>& multiplicity, bool exact);

struct RoundingOutcome {
  std::optional<IntegerSolution> solution;
  std::string failure;  // why no solution was produced
};

// Greedy rounding of a CG result with one repair pass; the answer is always
// checked against the compact model.
RoundingOutcome round_to_integer(const RmpState& rmp, const CgResult& result);

void write_trace_csv(std::ostream& out, const std::vector<CgIteration>& trace);

}  // namespace cgbp
