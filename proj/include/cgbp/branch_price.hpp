#pragma once

#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "cgbp/colgen.hpp"

namespace cgbp {

enum class NodeStrategy { kBestFirst, kDfs };

enum class NodeStatus { kOpen, kPruned, kFathomed, kBranched, kInfeasible, kBeamPruned };

const char* to_string(NodeStatus status);

struct BpNode {
  int id = 0;
  int parent = -1;
  int depth = 0;
  BoundSet bounds;
  // Rows on aggregated blocks (their variables have no per-copy bounds).
  std::vector<AggregateBranch> branches;
  // Before processing: the parent's bound; afterwards: this node's bound.
  double node_lb = -kInf;
  NodeStatus status = NodeStatus::kOpen;
  std::vector<Column> pool;  // inherited columns
};

struct BpConfig {
  CgConfig cg;
  MasterConfig master;
  NodeStrategy strategy = NodeStrategy::kBestFirst;
  int beam_width = 0;  // <= 0: unlimited
  int max_nodes = 100000;
  double time_limit_s = 0.0;  // <= 0: none
  // Round every fractional node's CG result for a quicker incumbent.
  bool node_heuristic = true;
  double tol = 1e-6;
};

struct BpHistoryEntry {
  int node_index = 0;
  double ub = kInf;
  double lb = -kInf;
  double wall_ms = 0.0;
};

struct NodeRecord {
  int id = 0;
  int parent = -1;
  int depth = 0;
  double bound = -kInf;
  NodeStatus status = NodeStatus::kOpen;
};

struct BpResult {
  std::optional<IntegerSolution> solution;
  double objective = kInf;  // UB
  double lower_bound = -kInf;
  int nodes = 0;  // nodes whose relaxation was solved
  bool optimal = false;
  bool infeasible = false;
  bool beam_pruned = false;
  bool limit_hit = false;
  bool uncertified_nodes = false;  // some node's CG did not converge
  double root_lp = kInf;
  double root_lagrangian = -kInf;
  int cg_iterations = 0;
  int columns_generated = 0;
  std::vector<BpHistoryEntry> history;
  std::vector<NodeRecord> node_log;  // solved nodes, in processing order
  double wall_ms = 0.0;
};

// Incumbent and bound bookkeeping shared by the node loop.
struct BpState {
  double ub = kInf;
  std::optional<IntegerSolution> incumbent;
  double lb = -kInf;
  bool integral_objective = false;
};

struct NodeOutcome {
  NodeStatus status = NodeStatus::kPruned;
  double bound = -kInf;
  bool certified = true;  // CG converged exactly
  std::optional<BranchCandidate> candidate;
  std::vector<Column> pool;
  CgResult cg;
};

// True when a node bound cannot beat the incumbent; with an integral
// objective the bound is rounded up first.
bool dominated(double bound, const BpState& state, double tol);

// Runs CG under the node's bounds and classifies the node; updates the
// incumbent when the node is integral or its rounding improves it.
NodeOutcome process_node(const BpNode& node, const CompactModel& model,
                         const PricerSet& pricers, BpState& state, const BpConfig& config);

// Two children splitting the candidate at floor/ceil of its value. Throws
// std::invalid_argument when the value is integral.
std::pair<BpNode, BpNode> branch(const BpNode& node, const CompactModel& model,
                                 const BranchCandidate& candidate, int first_child_id);

// Columns whose original values satisfy the bounds.
std::vector<Column> filter_columns(const CompactModel& model, const std::vector<Column>& pool,
                                   const BoundSet& bounds);

// Index into `open` of the next node: best_first = min node_lb, dfs =
// deepest; ties by lowest id.
std::size_t select_next(const std::vector<BpNode>& open, NodeStrategy strategy);

// Keeps the beam_width nodes with smallest node_lb (ties by id); the rest
// are returned marked kBeamPruned. beam_width <= 0 keeps everything.
std::pair<std::vector<BpNode>, std::vector<BpNode>> beam_select(std::vector<BpNode> nodes,
                                                                int beam_width);

BpResult run_bp(const CompactModel& model, std::vector<Column> initial_columns,
                const PricerSet& pricers, const BpConfig& config = {});

void write_history_csv(std::ostream& out, const std::vector<BpHistoryEntry>& history);

}  // namespace cgbp
