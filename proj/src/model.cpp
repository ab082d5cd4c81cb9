#include "cgbp/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace cgbp {

const char* to_string(StructureTag tag) {
  switch (tag) {
    case StructureTag::kGeneric: return "generic";
    case StructureTag::kKnapsack: return "knapsack";
    case StructureTag::kPath: return "path";
  }
  return "?";
}

int CompactModel::add_block(StructureTag tag, int multiplicity) {
  Block b;
  b.id = num_blocks();
  b.first_var = num_vars();
  b.tag = tag;
  b.multiplicity = multiplicity;
  blocks.push_back(std::move(b));
  block_rows.emplace_back();
  return blocks.back().id;
}

int CompactModel::add_variable(int block_id, std::string var_name, double cost,
                               bool is_integer, double lower, double upper) {
  if (block_id < 0 || block_id >= num_blocks()) {
    throw std::out_of_range("unknown block " + std::to_string(block_id));
  }
  Block& b = blocks[block_id];
  if (b.num_vars == 0) {
    b.first_var = num_vars();
  } else if (b.first_var + b.num_vars != num_vars()) {
    throw std::logic_error("variables of block " + std::to_string(block_id) +
                           " must be contiguous");
  }
  ++b.num_vars;
  variables.push_back(Variable{std::move(var_name), is_integer, lower, upper, block_id});
  costs.push_back(cost);
  return num_vars() - 1;
}

void CompactModel::add_linking_row(Row row) { linking_rows.push_back(std::move(row)); }

void CompactModel::add_block_row(int block_id, Row row) {
  if (block_id < 0 || block_id >= num_blocks()) {
    throw std::out_of_range("unknown block " + std::to_string(block_id));
  }
  block_rows[block_id].push_back(std::move(row));
}

const Block& CompactModel::block(int id) const {
  if (id < 0 || id >= num_blocks()) {
    throw std::out_of_range("unknown block " + std::to_string(id));
  }
  return blocks[id];
}

bool CompactModel::has_integral_objective() const {
  for (int j = 0; j < num_vars(); ++j) {
    if (costs[j] == 0.0) continue;
    if (!variables[j].is_integer || costs[j] != std::round(costs[j])) return false;
  }
  return true;
}

double CompactModel::max_abs_cost() const {
  double m = 0.0;
  for (double c : costs) m = std::max(m, std::abs(c));
  return m;
}

namespace {

void check_structure(const CompactModel& model, const Block& b,
                     std::vector<StructureViolation>& out) {
  auto local_ok = [&](int v) { return v >= 0 && v < b.num_vars; };
  const std::string where = "block " + std::to_string(b.id);
  if (const auto* ks = std::get_if<KnapsackStructure>(&b.structure)) {
    if (ks->item_vars.size() != ks->sizes.size()) {
      out.push_back({where, {b.id}, "knapsack items and sizes differ in length"});
    }
    for (int v : ks->item_vars) {
      if (!local_ok(v)) out.push_back({where, {b.id}, "knapsack item variable out of range"});
    }
    for (int s : ks->sizes) {
      if (s <= 0) out.push_back({where, {b.id}, "knapsack sizes must be positive"});
    }
    if (ks->capacity < 0) out.push_back({where, {b.id}, "negative knapsack capacity"});
    if (ks->roll_var >= 0 && !local_ok(ks->roll_var)) {
      out.push_back({where, {b.id}, "knapsack roll variable out of range"});
    }
  } else if (const auto* ps = std::get_if<PathStructure>(&b.structure)) {
    if (ps->arcs.size() != ps->arc_vars.size()) {
      out.push_back({where, {b.id}, "path arcs and arc variables differ in length"});
    }
    for (int v : ps->arc_vars) {
      if (!local_ok(v)) out.push_back({where, {b.id}, "path arc variable out of range"});
    }
    auto node_ok = [&](int n) { return n >= 0 && n < ps->num_nodes; };
    for (const auto& a : ps->arcs) {
      if (!node_ok(a.tail) || !node_ok(a.head)) {
        out.push_back({where, {b.id}, "path arc endpoint out of range"});
      }
    }
    if (!node_ok(ps->source) || !node_ok(ps->sink) || ps->source == ps->sink) {
      out.push_back({where, {b.id}, "invalid path source/sink"});
    }
  }
  (void)model;
}

}  // namespace

std::vector<StructureViolation> validate(const CompactModel& model) {
  std::vector<StructureViolation> out;
  const int n = model.num_vars();
  if (static_cast<int>(model.costs.size()) != n) {
    out.push_back({"objective", {}, "cost vector length differs from variable count"});
  }
  if (static_cast<int>(model.block_rows.size()) != model.num_blocks()) {
    out.push_back({"blocks", {}, "block row lists do not match block count"});
  }
  std::vector<int> owner(n, -1);
  for (const auto& b : model.blocks) {
    if (b.multiplicity < 0) {
      out.push_back({"block " + std::to_string(b.id), {b.id}, "negative multiplicity"});
    }
    for (int v = b.first_var; v < b.first_var + b.num_vars; ++v) {
      if (v < 0 || v >= n) {
        out.push_back({"block " + std::to_string(b.id), {b.id}, "variable range out of bounds"});
        break;
      }
      if (owner[v] != -1) {
        out.push_back({model.variables[v].name, {owner[v], b.id},
                       "variable belongs to more than one block"});
      }
      owner[v] = b.id;
    }
    check_structure(model, b, out);
  }
  for (int v = 0; v < n; ++v) {
    const auto& var = model.variables[v];
    if (owner[v] == -1 || owner[v] != var.block) {
      out.push_back({var.name, {var.block}, "variable is not owned by exactly its declared block"});
    }
    if (std::isnan(var.lower) || std::isnan(var.upper) || var.lower > var.upper) {
      out.push_back({var.name, {var.block}, "invalid bounds"});
    }
  }
  for (const auto& row : model.linking_rows) {
    for (const auto& t : row.terms) {
      if (t.var < 0 || t.var >= n) {
        out.push_back({row.name, {}, "linking row references unknown variable"});
        break;
      }
    }
  }
  for (int b = 0; b < static_cast<int>(model.block_rows.size()); ++b) {
    for (const auto& row : model.block_rows[b]) {
      std::set<int> spanned;
      bool unknown = false;
      for (const auto& t : row.terms) {
        if (t.var < 0 || t.var >= n) {
          unknown = true;
          continue;
        }
        if (t.coef != 0.0) spanned.insert(owner[t.var]);
      }
      if (unknown) out.push_back({row.name, {b}, "block row references unknown variable"});
      spanned.insert(b);
      if (spanned.size() > 1) {
        out.push_back({row.name, {spanned.begin(), spanned.end()},
                       "block row spans variables of several blocks"});
      }
    }
  }
  return out;
}

LpProblem lp_relaxation(const CompactModel& model) {
  LpProblem lp;
  // copy_base[b] + k * num_vars(b) is the first LP column of copy k of block b.
  std::vector<int> copy_base(model.num_blocks(), 0);
  int columns = 0;
  for (const auto& b : model.blocks) {
    copy_base[b.id] = columns;
    columns += b.num_vars * std::max(1, b.multiplicity);
  }
  lp.costs.assign(columns, 0.0);
  lp.lower.assign(columns, 0.0);
  lp.upper.assign(columns, kInf);
  auto copies = [&](int block) { return std::max(1, model.blocks[block].multiplicity); };
  auto lp_index = [&](int var, int copy) {
    const Block& b = model.blocks[model.variables[var].block];
    return copy_base[b.id] + copy * b.num_vars + (var - b.first_var);
  };
  for (int v = 0; v < model.num_vars(); ++v) {
    const int blk = model.variables[v].block;
    for (int k = 0; k < copies(blk); ++k) {
      const int j = lp_index(v, k);
      lp.costs[j] = model.costs[v];
      lp.lower[j] = model.variables[v].lower;
      lp.upper[j] = model.variables[v].upper;
    }
  }
  for (const auto& row : model.linking_rows) {
    std::vector<double> coeffs(columns, 0.0);
    for (const auto& t : row.terms) {
      const int blk = model.variables[t.var].block;
      for (int k = 0; k < copies(blk); ++k) coeffs[lp_index(t.var, k)] += t.coef;
    }
    lp.add_row(std::move(coeffs), row.relation, row.rhs);
  }
  for (const auto& b : model.blocks) {
    for (int k = 0; k < copies(b.id); ++k) {
      for (const auto& row : model.block_rows[b.id]) {
        std::vector<double> coeffs(columns, 0.0);
        for (const auto& t : row.terms) coeffs[lp_index(t.var, k)] += t.coef;
        lp.add_row(std::move(coeffs), row.relation, row.rhs);
      }
    }
  }
  return lp;
}

BlockSubmodel block_submodel(const CompactModel& model, int block_id) {
  const Block& b = model.block(block_id);
  BlockSubmodel sub;
  sub.block_id = b.id;
  sub.first_var = b.first_var;
  sub.tag = b.tag;
  sub.structure = b.structure;
  for (int k = 0; k < b.num_vars; ++k) {
    const auto& var = model.variables[b.first_var + k];
    sub.names.push_back(var.name);
    sub.costs.push_back(model.costs[b.first_var + k]);
    sub.lower.push_back(var.lower);
    sub.upper.push_back(var.upper);
    sub.is_integer.push_back(var.is_integer);
  }
  for (const auto& row : model.block_rows[b.id]) {
    Row local = row;
    for (auto& t : local.terms) t.var -= b.first_var;
    sub.rows.push_back(std::move(local));
  }
  return sub;
}

namespace {

double row_violation(Relation rel, double activity, double rhs) {
  switch (rel) {
    case Relation::kLessEqual: return std::max(0.0, activity - rhs);
    case Relation::kGreaterEqual: return std::max(0.0, rhs - activity);
    case Relation::kEqual: return std::abs(activity - rhs);
  }
  return 0.0;
}

}  // namespace

double block_violation(const BlockSubmodel& block,
                       const std::vector<double>& values) {
  if (static_cast<int>(values.size()) != block.num_vars()) return kInf;
  double worst = 0.0;
  for (int k = 0; k < block.num_vars(); ++k) {
    worst = std::max({worst, block.lower[k] - values[k], values[k] - block.upper[k]});
    if (block.is_integer[k]) worst = std::max(worst, std::abs(values[k] - std::round(values[k])));
  }
  for (const auto& row : block.rows) {
    double activity = 0.0;
    for (const auto& t : row.terms) activity += t.coef * values[t.var];
    worst = std::max(worst, row_violation(row.relation, activity, row.rhs));
  }
  return worst;
}

double solution_cost(const CompactModel& model, const IntegerSolution& solution) {
  double total = 0.0;
  for (int b = 0; b < static_cast<int>(solution.blocks.size()) && b < model.num_blocks(); ++b) {
    const Block& blk = model.blocks[b];
    for (const auto& p : solution.blocks[b]) {
      double c = 0.0;
      for (int k = 0; k < blk.num_vars && k < static_cast<int>(p.values.size()); ++k) {
        c += model.costs[blk.first_var + k] * p.values[k];
      }
      total += c * p.count;
    }
  }
  return total;
}

std::vector<std::string> verify_solution(const CompactModel& model,
                                         const IntegerSolution& solution,
                                         double tol) {
  std::vector<std::string> problems;
  if (static_cast<int>(solution.blocks.size()) != model.num_blocks()) {
    problems.push_back("solution lists " + std::to_string(solution.blocks.size()) +
                       " blocks, model has " + std::to_string(model.num_blocks()));
    return problems;
  }
  for (const auto& blk : model.blocks) {
    const auto& points = solution.blocks[blk.id];
    const BlockSubmodel sub = block_submodel(model, blk.id);
    if (!blk.aggregated()) {
      if (points.size() != 1 || points[0].count != 1) {
        problems.push_back("block " + std::to_string(blk.id) + " needs exactly one point");
        continue;
      }
    } else {
      long copies = 0;
      for (const auto& p : points) copies += p.count;
      if (copies > blk.multiplicity) {
        problems.push_back("block " + std::to_string(blk.id) + " uses " + std::to_string(copies) +
                           " copies, multiplicity is " + std::to_string(blk.multiplicity));
      }
    }
    for (const auto& p : points) {
      if (p.count < 0) problems.push_back("negative point count in block " + std::to_string(blk.id));
      const double v = block_violation(sub, p.values);
      if (v > tol) {
        problems.push_back("block " + std::to_string(blk.id) + " point violates its constraints by " +
                           std::to_string(v));
      }
    }
  }
  if (!problems.empty()) return problems;
  for (const auto& row : model.linking_rows) {
    double activity = 0.0;
    for (const auto& t : row.terms) {
      const Block& blk = model.blocks[model.variables[t.var].block];
      for (const auto& p : solution.blocks[blk.id]) {
        activity += t.coef * p.values[t.var - blk.first_var] * p.count;
      }
    }
    const double v = row_violation(row.relation, activity, row.rhs);
    if (v > tol) {
      problems.push_back("linking row " + row.name + " violated by " + std::to_string(v));
    }
  }
  const double cost = solution_cost(model, solution);
  if (std::abs(cost - solution.objective) > tol * (1.0 + std::abs(cost))) {
    problems.push_back("reported objective " + std::to_string(solution.objective) +
                       " differs from recomputed " + std::to_string(cost));
  }
  return problems;
}

}  // namespace cgbp
