#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_set>
#include <variant>
#include <vector>

#include "cgbp/lp_core.hpp"
#include "cgbp/model.hpp"

namespace cgbp {

enum class RowKind { kLinking, kConvexity, kBranching };

// Which master row an artificial column covers, and with which sign.
struct ArtificialTarget {
  RowKind kind = RowKind::kLinking;
  int index = 0;
  double sign = 1.0;
};

// One extreme point of a block, carried as a master column. The master
// weight on the column is its combination coefficient.
struct Column {
  int block_id = -1;
  double cost = 0.0;
  std::vector<double> linking_coeffs;
  std::vector<double> original_values;  // local to the block
  bool is_artificial = false;
  std::uint64_t fingerprint = 0;
  ArtificialTarget artificial;
};

// FNV-1a over the block id and the values rounded to 1e-6.
std::uint64_t fingerprint_of(int block_id, std::span<const double> values);

// Builds a column from a block point: rounds integer-flagged values that are
// within 1e-6 of an integer, computes cost, linking coefficients and the
// fingerprint.
Column make_column(const CompactModel& model, int block_id,
                   std::vector<double> values);

// Per-variable bounds over the whole compact model, tightened by branching.
struct BoundSet {
  std::vector<double> lower;
  std::vector<double> upper;

  static BoundSet from_model(const CompactModel& model);
  // True when the point satisfies the bounds of its block's variables.
  bool admits(const CompactModel& model, const Column& column,
              double tol = 1e-9) const;
};

// Arc of the layered pattern graph of a knapsack block: `count` copies of
// item `item` placed when the items before it already fill `load`.
struct KnapsackArc {
  int item = 0;
  int load = 0;
  int count = 0;
  auto operator<=>(const KnapsackArc&) const = default;
};

// Arcs of the layered pattern graph traversed by a pattern.
std::vector<KnapsackArc> pattern_arcs(const KnapsackStructure& structure,
                                      std::span<const double> values);

// Master row on an aggregated block: sum over the block's columns of
// weight * target(column) (relation) rhs, where the target is either a local
// variable's value or membership of a knapsack arc.
struct AggregateBranch {
  int block = 0;
  std::variant<int, KnapsackArc> target;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

double aggregate_coefficient(const CompactModel& model,
                             const AggregateBranch& branch,
                             const Column& column);

struct MasterConfig {
  // <= 0 selects 1e4 * (1 + max|cost|) * max(1, linking rows).
  double big_m = 0.0;
  double tol_int = 1e-6;
  double tol_feas = 1e-9;
  LpConfig lp;
};

double default_big_m(const CompactModel& model);

// Restricted master problem. The pool only grows during a CG run.
struct RmpState {
  const CompactModel* model = nullptr;
  std::vector<BlockSubmodel> blocks;
  std::vector<Column> pool;
  std::unordered_set<std::uint64_t> fingerprints;
  BoundSet bounds;
  std::vector<AggregateBranch> branches;
  double big_m = 0.0;
  MasterConfig config;
  int rejected_columns = 0;

  int num_convexity_rows() const;
  int convexity_row_of(int block) const;  // -1 for aggregated blocks
};

// Artificial columns with cost big_m are added for every master row so that
// the first LRMP is feasible whatever the initial columns.
RmpState init_rmp(const CompactModel& model, std::vector<Column> initial_columns,
                  const MasterConfig& config = {}, BoundSet bounds = {},
                  std::vector<AggregateBranch> branches = {});

struct DualPrices {
  std::vector<double> linking;    // pi, one per linking row
  std::vector<double> convexity;  // sigma, one per block; 0 for aggregated
  std::vector<double> branching;  // one per aggregate branch row
};

struct LrmpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> weights;  // one per pool column
  DualPrices duals;
  double objective = 0.0;
  int lp_iterations = 0;
};

LpProblem assemble_lrmp(const RmpState& rmp);
LrmpSolution solve_lrmp(const RmpState& rmp);

double reduced_cost(const RmpState& rmp, const Column& column,
                    const DualPrices& duals);

// c_v - sum_r pi_r A_rv - (aggregate duals on variable targets), local to
// the block.
std::vector<double> block_variable_prices(const RmpState& rmp, int block,
                                          const DualPrices& duals);

// Skips duplicates (by fingerprint), artificial columns, columns outside the
// node bounds and columns failing their block constraints. Returns the
// number inserted.
int add_columns(RmpState& rmp, std::vector<Column> columns);

struct RecoveredBlock {
  // Convexity block: the convex combination of its points. Aggregated
  // block: the weighted sum over copies.
  std::vector<double> values;
  std::vector<std::pair<int, double>> columns;  // (pool index, weight > tol)
};

struct RecoveredSolution {
  std::vector<RecoveredBlock> blocks;
  bool artificial_active = false;
  double artificial_weight = 0.0;
};

RecoveredSolution recover_original_solution(const RmpState& rmp,
                                            std::span<const double> weights);

struct OriginalVariableChoice {
  int block = 0;
  int var = 0;  // global variable index
  double value = 0.0;
};

struct ArcFlowChoice {
  int block = 0;
  KnapsackArc arc;
  double value = 0.0;
};

// Only original-variable quantities can be branched on; master weights are
// not representable.
using BranchCandidate = std::variant<OriginalVariableChoice, ArcFlowChoice>;

// Most fractional integer-flagged quantity of the recovered solution
// (|frac - 0.5| minimal, ties by lowest variable index). Aggregated
// knapsack blocks fall back to arc flows of the pattern graph when every
// aggregated variable is integral. nullopt means an integer solution can be
// read off with integer_solution().
std::optional<BranchCandidate> select_fractional(const RmpState& rmp,
                                                 std::span<const double> weights);

// Integer solution encoded by the weights, or nullopt when they do not
// encode one (fractional, or an artificial is active).
std::optional<IntegerSolution> integer_solution(const RmpState& rmp,
                                                std::span<const double> weights);

}  // namespace cgbp
