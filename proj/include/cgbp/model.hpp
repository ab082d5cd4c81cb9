#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "cgbp/lp_core.hpp"

namespace cgbp {

struct Variable {
  std::string name;
  bool is_integer = true;
  double lower = 0.0;
  double upper = kInf;
  int block = -1;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

// Sparse row over global variable indices.
struct Row {
  std::string name;
  std::vector<Term> terms;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

enum class StructureTag { kGeneric, kKnapsack, kPath };

const char* to_string(StructureTag tag);

// Variable indices below are local to the owning block.
struct KnapsackStructure {
  std::vector<int> item_vars;
  std::vector<int> sizes;
  int capacity = 0;
  // Binary "roll used" variable gating the capacity, or -1.
  int roll_var = -1;
};

struct PathArc {
  int tail = 0;
  int head = 0;
};

struct PathStructure {
  int num_nodes = 0;
  std::vector<PathArc> arcs;
  std::vector<int> arc_vars;
  int source = 0;
  int sink = 0;
  // Maximum number of arcs on a path, or -1 for no limit.
  int max_hops = -1;
};

using BlockStructure =
    std::variant<std::monostate, KnapsackStructure, PathStructure>;

struct Block {
  int id = 0;
  int first_var = 0;
  int num_vars = 0;
  StructureTag tag = StructureTag::kGeneric;
  BlockStructure structure;
  // 0: the master carries a convexity row for this block. > 0: the block
  // stands for `multiplicity` identical copies whose columns are combined
  // with unbounded nonnegative weights.
  int multiplicity = 0;

  bool aggregated() const { return multiplicity > 0; }
  bool contains(int var) const {
    return var >= first_var && var < first_var + num_vars;
  }
};

// Block-angular integer program: linking rows couple blocks, every block row
// touches the variables of its own block only. Treated as immutable once
// built.
struct CompactModel {
  std::string name;
  std::vector<Variable> variables;
  std::vector<double> costs;
  std::vector<Row> linking_rows;
  std::vector<Block> blocks;
  std::vector<std::vector<Row>> block_rows;

  int num_vars() const { return static_cast<int>(variables.size()); }
  int num_blocks() const { return static_cast<int>(blocks.size()); }
  int num_linking_rows() const { return static_cast<int>(linking_rows.size()); }

  // Appends a block whose variables are added afterwards with add_variable.
  int add_block(StructureTag tag = StructureTag::kGeneric, int multiplicity = 0);
  int add_variable(int block, std::string name, double cost, bool is_integer,
                   double lower, double upper);
  void add_linking_row(Row row);
  void add_block_row(int block, Row row);

  const Block& block(int id) const;
  // True when every variable with a nonzero cost is integer with an integral
  // cost coefficient, so every integer solution has an integral objective.
  bool has_integral_objective() const;
  double max_abs_cost() const;
};

struct StructureViolation {
  std::string row;
  std::vector<int> blocks;
  std::string message;
};

std::vector<StructureViolation> validate(const CompactModel& model);

// Integrality dropped. Aggregated blocks are expanded into `multiplicity`
// explicit copies; linking coefficients are replicated over the copies.
// Rows are emitted as linking rows first, then block rows per block.
LpProblem lp_relaxation(const CompactModel& model);

// A block's own constraint set in local variable indices.
struct BlockSubmodel {
  int block_id = 0;
  int first_var = 0;
  StructureTag tag = StructureTag::kGeneric;
  BlockStructure structure;
  std::vector<std::string> names;
  std::vector<double> costs;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> is_integer;
  std::vector<Row> rows;  // terms use local indices

  int num_vars() const { return static_cast<int>(costs.size()); }
};

// Throws std::out_of_range for an unknown block id.
BlockSubmodel block_submodel(const CompactModel& model, int block_id);

// Largest violation of the block's rows and bounds at a local point.
double block_violation(const BlockSubmodel& block,
                       const std::vector<double>& values);

// One chosen block point and how many copies of it are used. Convexity
// blocks hold exactly one point with count 1.
struct BlockPoint {
  std::vector<double> values;  // local to the block
  int count = 1;
};

struct IntegerSolution {
  std::vector<std::vector<BlockPoint>> blocks;  // indexed by block id
  double objective = 0.0;
};

// Empty when the solution satisfies every row, bound and integrality flag
// of the compact model (within tol) and its objective matches.
std::vector<std::string> verify_solution(const CompactModel& model,
                                         const IntegerSolution& solution,
                                         double tol = 1e-6);

double solution_cost(const CompactModel& model, const IntegerSolution& solution);

}  // namespace cgbp
