#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "cgbp/master.hpp"

namespace cgbp {

struct CuttingStockItem {
  int size = 0;
  int demand = 0;
};

struct CuttingStockInstance {
  int roll_width = 0;
  std::vector<CuttingStockItem> items;
};

struct NetArc {
  int from = 0;
  int to = 0;
  double cost = 0.0;
  int capacity = 0;
};

struct NetTask {
  int src = 0;
  int dst = 0;
  int demand = 0;
  int max_hops = -1;  // -1: no limit
};

struct NetPathInstance {
  int nodes = 0;
  std::vector<NetArc> arcs;
  std::vector<NetTask> tasks;
};

using Instance = std::variant<CuttingStockInstance, NetPathInstance>;

// Violation of an instance invariant; `field` is a JSON pointer.
class InstanceError : public std::runtime_error {
 public:
  InstanceError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

void check_instance(const CuttingStockInstance& instance);
void check_instance(const NetPathInstance& instance);
void check_instance(const Instance& instance);

// One aggregated knapsack block: item counts a_i in [0, min(d_i, W / s_i)]
// and a binary roll variable y with cost 1, block row s.a - W y <= 0, and
// one demand row sum a_i >= d_i per item.
CompactModel build_cutting_stock(const CuttingStockInstance& instance);

// One path block per task over arc-use binaries with flow conservation (and
// a hop limit row when given); one capacity row per arc.
CompactModel build_net_path(const NetPathInstance& instance);

CompactModel build_model(const Instance& instance);

// Cutting stock: one roll holding a single piece of one item, per item.
// Net path: up to k cheapest loopless paths per task, capacities ignored.
std::vector<Column> warm_start(const CompactModel& model, const Instance& instance,
                               int k_paths = 3);

// Outcome of any of the three algorithms, in the terms the report needs.
struct SolveSummary {
  std::string algorithm;
  std::string status;       // optimal | feasible | infeasible | limit | no_solution
  std::string termination;  // algorithm-specific reason
  double lb = -kInf;
  double ub = kInf;
  double lp_value = kInf;  // final LRMP / root relaxation, when available
  int iterations = 0;
  int nodes = 0;
  int columns = 0;
  double wall_ms = 0.0;
  std::optional<IntegerSolution> solution;
};

// {status, objective, bounds:{lb,ub}, iterations, nodes, wall_ms,
//  termination, verified, solution:{...}}. "verified" is true only when
// the solution satisfies the compact model.
nlohmann::json solution_report(const CompactModel& model, const Instance& instance,
                               const SolveSummary& summary);

std::string report_text(const nlohmann::json& report);

struct CuttingStockGenParams {
  int items = 5;
  int min_size = 1;
  int max_size = 20;
  int width = 50;
  int max_demand = 8;
};

struct NetPathGenParams {
  int nodes = 8;
  int tasks = 3;
  double arc_probability = 0.35;
  int max_cost = 9;
  int min_capacity = 1;
  int max_capacity = 3;
  int max_demand = 2;
  int max_hops = -1;
  int max_retries = 100;
};

CuttingStockInstance generate_cutting_stock(std::uint64_t seed, const CuttingStockGenParams& p);

// Regenerates until every task has a path whose arcs can each carry its
// demand alone (and within max_hops); throws after max_retries.
NetPathInstance generate_net_path(std::uint64_t seed, const NetPathGenParams& p);

}  // namespace cgbp
