#include "cgbp/master.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "cgbp/log.hpp"

namespace cgbp {

std::uint64_t fingerprint_of(int block_id, std::span<const double> values) {
  constexpr std::uint64_t kPrime = 1099511628211ULL;
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&](std::uint64_t word) {
    for (int k = 0; k < 8; ++k) {
      h ^= (word >> (8 * k)) & 0xffU;
      h *= kPrime;
    }
  };
  mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(block_id)));
  for (double v : values) {
    mix(static_cast<std::uint64_t>(std::llround(v * 1e6)));
  }
  return h;
}

Column make_column(const CompactModel& model, int block_id,
                   std::vector<double> values) {
  const Block& b = model.block(block_id);
  if (static_cast<int>(values.size()) != b.num_vars) {
    throw std::invalid_argument("column for block " + std::to_string(block_id) +
                                " has " + std::to_string(values.size()) +
                                " values, expected " + std::to_string(b.num_vars));
  }
  Column col;
  col.block_id = block_id;
  for (int k = 0; k < b.num_vars; ++k) {
    if (model.variables[b.first_var + k].is_integer) {
      const double r = std::round(values[k]);
      if (std::abs(values[k] - r) <= 1e-6) values[k] = r;
    }
    if (values[k] == 0.0) values[k] = 0.0;  // drop negative zero
    col.cost += model.costs[b.first_var + k] * values[k];
  }
  col.linking_coeffs.assign(model.num_linking_rows(), 0.0);
  for (int r = 0; r < model.num_linking_rows(); ++r) {
    double a = 0.0;
    for (const auto& t : model.linking_rows[r].terms) {
      if (b.contains(t.var)) a += t.coef * values[t.var - b.first_var];
    }
    col.linking_coeffs[r] = a;
  }
  col.fingerprint = fingerprint_of(block_id, values);
  col.original_values = std::move(values);
  return col;
}

BoundSet BoundSet::from_model(const CompactModel& model) {
  BoundSet bs;
  for (const auto& v : model.variables) {
    bs.lower.push_back(v.lower);
    bs.upper.push_back(v.upper);
  }
  return bs;
}

bool BoundSet::admits(const CompactModel& model, const Column& column,
                      double tol) const {
  if (column.is_artificial || lower.empty()) return true;
  const Block& b = model.block(column.block_id);
  for (int k = 0; k < b.num_vars; ++k) {
    const double v = column.original_values[k];
    if (v < lower[b.first_var + k] - tol || v > upper[b.first_var + k] + tol) return false;
  }
  return true;
}

std::vector<KnapsackArc> pattern_arcs(const KnapsackStructure& structure,
                                      std::span<const double> values) {
  std::vector<KnapsackArc> arcs;
  arcs.reserve(structure.item_vars.size());
  int load = 0;
  for (int i = 0; i < static_cast<int>(structure.item_vars.size()); ++i) {
    const int count = static_cast<int>(std::lround(values[structure.item_vars[i]]));
    arcs.push_back(KnapsackArc{i, load, count});
    load += count * structure.sizes[i];
  }
  return arcs;
}

double aggregate_coefficient(const CompactModel& model,
                             const AggregateBranch& branch,
                             const Column& column) {
  if (column.is_artificial || column.block_id != branch.block) return 0.0;
  if (const int* var = std::get_if<int>(&branch.target)) {
    return column.original_values[*var];
  }
  const auto& arc = std::get<KnapsackArc>(branch.target);
  const auto* ks = std::get_if<KnapsackStructure>(&model.block(branch.block).structure);
  if (ks == nullptr) return 0.0;
  const auto arcs = pattern_arcs(*ks, column.original_values);
  return std::find(arcs.begin(), arcs.end(), arc) != arcs.end() ? 1.0 : 0.0;
}

double default_big_m(const CompactModel& model) {
  return 1e4 * (1.0 + model.max_abs_cost()) *
         std::max(1, model.num_linking_rows());
}

int RmpState::num_convexity_rows() const {
  int n = 0;
  for (const auto& b : model->blocks) n += b.aggregated() ? 0 : 1;
  return n;
}

int RmpState::convexity_row_of(int block) const {
  if (model->blocks[block].aggregated()) return -1;
  int row = 0;
  for (int b = 0; b < block; ++b) row += model->blocks[b].aggregated() ? 0 : 1;
  return row;
}

namespace {

Column artificial_column(const RmpState& rmp, RowKind kind, int index,
                         double sign, int block) {
  Column col;
  col.block_id = block;
  col.cost = rmp.big_m;
  col.is_artificial = true;
  col.artificial = ArtificialTarget{kind, index, sign};
  col.linking_coeffs.assign(rmp.model->num_linking_rows(), 0.0);
  if (kind == RowKind::kLinking) col.linking_coeffs[index] = sign;
  return col;
}

double artificial_sign(Relation rel, double rhs) {
  switch (rel) {
    case Relation::kGreaterEqual: return 1.0;
    case Relation::kLessEqual: return -1.0;
    case Relation::kEqual: return rhs >= 0.0 ? 1.0 : -1.0;
  }
  return 1.0;
}

}  // namespace

RmpState init_rmp(const CompactModel& model, std::vector<Column> initial_columns,
                  const MasterConfig& config, BoundSet bounds,
                  std::vector<AggregateBranch> branches) {
  RmpState rmp;
  rmp.model = &model;
  rmp.config = config;
  rmp.big_m = config.big_m > 0.0 ? config.big_m : default_big_m(model);
  rmp.bounds = bounds.lower.empty() ? BoundSet::from_model(model) : std::move(bounds);
  rmp.branches = std::move(branches);
  for (int b = 0; b < model.num_blocks(); ++b) rmp.blocks.push_back(block_submodel(model, b));

  for (int r = 0; r < model.num_linking_rows(); ++r) {
    const auto& row = model.linking_rows[r];
    rmp.pool.push_back(artificial_column(rmp, RowKind::kLinking, r,
                                         artificial_sign(row.relation, row.rhs), -1));
  }
  for (const auto& b : model.blocks) {
    if (b.aggregated()) continue;
    rmp.pool.push_back(artificial_column(rmp, RowKind::kConvexity,
                                         rmp.convexity_row_of(b.id), 1.0, b.id));
  }
  for (int k = 0; k < static_cast<int>(rmp.branches.size()); ++k) {
    const auto& br = rmp.branches[k];
    rmp.pool.push_back(artificial_column(rmp, RowKind::kBranching, k,
                                         artificial_sign(br.relation, br.rhs), br.block));
  }
  add_columns(rmp, std::move(initial_columns));
  return rmp;
}

LpProblem assemble_lrmp(const RmpState& rmp) {
  const CompactModel& model = *rmp.model;
  const int n = static_cast<int>(rmp.pool.size());
  const int num_link = model.num_linking_rows();
  const int num_conv = rmp.num_convexity_rows();
  const int num_branch = static_cast<int>(rmp.branches.size());

  LpProblem lp;
  lp.costs.reserve(n);
  for (const auto& col : rmp.pool) lp.costs.push_back(col.cost);
  lp.rows.resize(num_link + num_conv + num_branch);
  for (int r = 0; r < num_link; ++r) {
    lp.rows[r].relation = model.linking_rows[r].relation;
    lp.rows[r].rhs = model.linking_rows[r].rhs;
  }
  for (int r = 0; r < num_conv; ++r) {
    lp.rows[num_link + r].relation = Relation::kEqual;
    lp.rows[num_link + r].rhs = 1.0;
  }
  for (int k = 0; k < num_branch; ++k) {
    lp.rows[num_link + num_conv + k].relation = rmp.branches[k].relation;
    lp.rows[num_link + num_conv + k].rhs = rmp.branches[k].rhs;
  }
  for (auto& row : lp.rows) row.coeffs.assign(n, 0.0);

  for (int j = 0; j < n; ++j) {
    const Column& col = rmp.pool[j];
    if (col.is_artificial) {
      const auto& t = col.artificial;
      const int offset = t.kind == RowKind::kLinking     ? 0
                         : t.kind == RowKind::kConvexity ? num_link
                                                         : num_link + num_conv;
      lp.rows[offset + t.index].coeffs[j] = t.sign;
      continue;
    }
    for (int r = 0; r < num_link; ++r) lp.rows[r].coeffs[j] = col.linking_coeffs[r];
    const int conv = rmp.convexity_row_of(col.block_id);
    if (conv >= 0) lp.rows[num_link + conv].coeffs[j] = 1.0;
    for (int k = 0; k < num_branch; ++k) {
      lp.rows[num_link + num_conv + k].coeffs[j] =
          aggregate_coefficient(model, rmp.branches[k], col);
    }
  }
  return lp;
}

LrmpSolution solve_lrmp(const RmpState& rmp) {
  const LpProblem lp = assemble_lrmp(rmp);
  const LpSolution sol = solve_lp(lp, rmp.config.lp);
  LrmpSolution out;
  out.status = sol.status;
  out.weights = sol.primal;
  out.objective = sol.objective;
  out.lp_iterations = sol.iterations;

  const CompactModel& model = *rmp.model;
  const int num_link = model.num_linking_rows();
  const int num_conv = rmp.num_convexity_rows();
  out.duals.linking.assign(sol.duals.begin(), sol.duals.begin() + num_link);
  out.duals.convexity.assign(model.num_blocks(), 0.0);
  for (const auto& b : model.blocks) {
    const int row = rmp.convexity_row_of(b.id);
    if (row >= 0) out.duals.convexity[b.id] = sol.duals[num_link + row];
  }
  out.duals.branching.assign(sol.duals.begin() + num_link + num_conv, sol.duals.end());
  return out;
}

double reduced_cost(const RmpState& rmp, const Column& column,
                    const DualPrices& duals) {
  double rc = column.cost;
  if (column.is_artificial) {
    const auto& t = column.artificial;
    switch (t.kind) {
      case RowKind::kLinking: return rc - t.sign * duals.linking[t.index];
      case RowKind::kConvexity: return rc - t.sign * duals.convexity[column.block_id];
      case RowKind::kBranching: return rc - t.sign * duals.branching[t.index];
    }
  }
  for (std::size_t r = 0; r < duals.linking.size(); ++r) {
    rc -= duals.linking[r] * column.linking_coeffs[r];
  }
  rc -= duals.convexity[column.block_id];
  for (std::size_t k = 0; k < rmp.branches.size(); ++k) {
    rc -= duals.branching[k] * aggregate_coefficient(*rmp.model, rmp.branches[k], column);
  }
  return rc;
}

std::vector<double> block_variable_prices(const RmpState& rmp, int block,
                                          const DualPrices& duals) {
  const CompactModel& model = *rmp.model;
  const Block& b = model.block(block);
  std::vector<double> price(model.costs.begin() + b.first_var,
                            model.costs.begin() + b.first_var + b.num_vars);
  for (int r = 0; r < model.num_linking_rows(); ++r) {
    if (duals.linking[r] == 0.0) continue;
    for (const auto& t : model.linking_rows[r].terms) {
      if (b.contains(t.var)) price[t.var - b.first_var] -= duals.linking[r] * t.coef;
    }
  }
  for (std::size_t k = 0; k < rmp.branches.size(); ++k) {
    const auto& br = rmp.branches[k];
    if (br.block != block) continue;
    if (const int* var = std::get_if<int>(&br.target)) price[*var] -= duals.branching[k];
  }
  return price;
}

int add_columns(RmpState& rmp, std::vector<Column> columns) {
  const CompactModel& model = *rmp.model;
  int added = 0;
  for (auto& col : columns) {
    if (col.is_artificial) continue;
    if (col.block_id < 0 || col.block_id >= model.num_blocks()) {
      ++rmp.rejected_columns;
      continue;
    }
    const BlockSubmodel& sub = rmp.blocks[col.block_id];
    const double violation = block_violation(sub, col.original_values);
    if (violation > rmp.config.tol_feas) {
      ++rmp.rejected_columns;
      logger()->debug("rejected column for block {}: block constraints violated by {}",
                      col.block_id, violation);
      continue;
    }
    if (!rmp.bounds.admits(model, col, rmp.config.tol_feas)) {
      ++rmp.rejected_columns;
      logger()->debug("rejected column for block {}: outside node bounds", col.block_id);
      continue;
    }
    const Column ref = make_column(model, col.block_id, col.original_values);
    bool consistent = std::abs(ref.cost - col.cost) <= 1e-9 * (1.0 + std::abs(ref.cost)) &&
                      ref.linking_coeffs.size() == col.linking_coeffs.size();
    for (std::size_t r = 0; consistent && r < ref.linking_coeffs.size(); ++r) {
      consistent = std::abs(ref.linking_coeffs[r] - col.linking_coeffs[r]) <= 1e-9;
    }
    if (!consistent) {
      ++rmp.rejected_columns;
      logger()->debug("rejected column for block {}: inconsistent coefficients", col.block_id);
      continue;
    }
    if (!rmp.fingerprints.insert(ref.fingerprint).second) continue;
    rmp.pool.push_back(std::move(ref));
    ++added;
  }
  return added;
}

RecoveredSolution recover_original_solution(const RmpState& rmp,
                                            std::span<const double> weights) {
  const CompactModel& model = *rmp.model;
  RecoveredSolution out;
  out.blocks.resize(model.num_blocks());
  for (const auto& b : model.blocks) out.blocks[b.id].values.assign(b.num_vars, 0.0);
  for (std::size_t j = 0; j < rmp.pool.size() && j < weights.size(); ++j) {
    const double w = weights[j];
    const Column& col = rmp.pool[j];
    if (col.is_artificial) {
      if (w > rmp.config.tol_int) {
        out.artificial_active = true;
        out.artificial_weight += w;
      }
      continue;
    }
    if (w <= 1e-12) continue;
    auto& rb = out.blocks[col.block_id];
    for (std::size_t k = 0; k < col.original_values.size(); ++k) {
      rb.values[k] += w * col.original_values[k];
    }
    if (w > rmp.config.tol_int) rb.columns.emplace_back(static_cast<int>(j), w);
  }
  return out;
}

namespace {

double fractionality(double v) { return v - std::floor(v); }

bool is_integral(double v, double tol) {
  const double f = fractionality(v);
  return f <= tol || f >= 1.0 - tol;
}

std::map<KnapsackArc, double> arc_flows(const RmpState& rmp, int block,
                                        const KnapsackStructure& ks,
                                        std::span<const double> weights) {
  std::map<KnapsackArc, double> flows;
  for (std::size_t j = 0; j < rmp.pool.size() && j < weights.size(); ++j) {
    const Column& col = rmp.pool[j];
    if (col.is_artificial || col.block_id != block || weights[j] <= 1e-12) continue;
    for (const auto& arc : pattern_arcs(ks, col.original_values)) flows[arc] += weights[j];
  }
  return flows;
}

bool weights_integral(const RmpState& rmp, int block, std::span<const double> weights) {
  for (std::size_t j = 0; j < rmp.pool.size() && j < weights.size(); ++j) {
    const Column& col = rmp.pool[j];
    if (col.is_artificial || col.block_id != block) continue;
    if (!is_integral(weights[j], rmp.config.tol_int)) return false;
  }
  return true;
}

}  // namespace

std::optional<BranchCandidate> select_fractional(const RmpState& rmp,
                                                 std::span<const double> weights) {
  const CompactModel& model = *rmp.model;
  const double tol = rmp.config.tol_int;
  const RecoveredSolution rec = recover_original_solution(rmp, weights);

  std::optional<OriginalVariableChoice> best;
  double best_score = kInf;
  for (const auto& b : model.blocks) {
    for (int k = 0; k < b.num_vars; ++k) {
      const int var = b.first_var + k;
      if (!model.variables[var].is_integer) continue;
      const double v = rec.blocks[b.id].values[k];
      if (is_integral(v, tol)) continue;
      const double score = std::abs(fractionality(v) - 0.5);
      if (score < best_score - 1e-12) {
        best_score = score;
        best = OriginalVariableChoice{b.id, var, v};
      }
    }
  }
  if (best) return *best;

  for (const auto& b : model.blocks) {
    if (!b.aggregated() || weights_integral(rmp, b.id, weights)) continue;
    const auto* ks = std::get_if<KnapsackStructure>(&b.structure);
    if (ks == nullptr) {
      throw std::logic_error("aggregated block " + std::to_string(b.id) +
                             " has fractional weights but no pattern graph to branch on");
    }
    std::optional<ArcFlowChoice> arc_best;
    double arc_score = kInf;
    for (const auto& [arc, flow] : arc_flows(rmp, b.id, *ks, weights)) {
      if (is_integral(flow, tol)) continue;
      const double score = std::abs(fractionality(flow) - 0.5);
      if (score < arc_score - 1e-12) {
        arc_score = score;
        arc_best = ArcFlowChoice{b.id, arc, flow};
      }
    }
    if (arc_best) return *arc_best;
  }
  return std::nullopt;
}

namespace {

// Splits an integral flow on the layered pattern graph into unit paths.
std::optional<std::vector<BlockPoint>> decompose_patterns(
    const Block& block, const KnapsackStructure& ks,
    std::map<KnapsackArc, double> flows) {
  std::map<KnapsackArc, long> units;
  for (const auto& [arc, f] : flows) {
    const long u = std::lround(f);
    if (u > 0) units[arc] = u;
  }
  const int n = static_cast<int>(ks.item_vars.size());
  std::map<std::vector<double>, int> multiset;
  for (;;) {
    std::vector<double> values(block.num_vars, 0.0);
    int load = 0;
    bool found = true;
    for (int i = 0; i < n; ++i) {
      auto it = units.lower_bound(KnapsackArc{i, load, 0});
      if (it == units.end() || it->first.item != i || it->first.load != load) {
        found = false;
        break;
      }
      values[ks.item_vars[i]] = it->first.count;
      load += it->first.count * ks.sizes[i];
      if (--it->second == 0) units.erase(it);
    }
    if (!found) {
      // Either every unit was consumed at the first layer or the flow was
      // not conservative.
      if (!units.empty()) return std::nullopt;
      break;
    }
    bool empty = load == 0;
    if (ks.roll_var >= 0) values[ks.roll_var] = empty ? 0.0 : 1.0;
    if (!empty) ++multiset[values];
    if (units.empty()) break;
  }
  std::vector<BlockPoint> points;
  for (auto& [values, count] : multiset) points.push_back(BlockPoint{values, count});
  return points;
}

}  // namespace

std::optional<IntegerSolution> integer_solution(const RmpState& rmp,
                                                std::span<const double> weights) {
  const CompactModel& model = *rmp.model;
  const double tol = rmp.config.tol_int;
  const RecoveredSolution rec = recover_original_solution(rmp, weights);
  if (rec.artificial_active) return std::nullopt;

  IntegerSolution sol;
  sol.blocks.resize(model.num_blocks());
  for (const auto& b : model.blocks) {
    const auto& values = rec.blocks[b.id].values;
    for (int k = 0; k < b.num_vars; ++k) {
      if (model.variables[b.first_var + k].is_integer && !is_integral(values[k], tol)) {
        return std::nullopt;
      }
    }
    if (!b.aggregated()) {
      std::vector<double> point = values;
      for (int k = 0; k < b.num_vars; ++k) {
        if (model.variables[b.first_var + k].is_integer) point[k] = std::round(point[k]);
      }
      sol.blocks[b.id].push_back(BlockPoint{std::move(point), 1});
      continue;
    }
    if (weights_integral(rmp, b.id, weights)) {
      std::map<std::vector<double>, int> multiset;
      for (const auto& [j, w] : rec.blocks[b.id].columns) {
        const long count = std::lround(w);
        if (count > 0) multiset[rmp.pool[j].original_values] += static_cast<int>(count);
      }
      for (auto& [v, c] : multiset) sol.blocks[b.id].push_back(BlockPoint{v, c});
      continue;
    }
    const auto* ks = std::get_if<KnapsackStructure>(&b.structure);
    if (ks == nullptr) return std::nullopt;
    const auto flows = arc_flows(rmp, b.id, *ks, weights);
    for (const auto& [arc, f] : flows) {
      if (!is_integral(f, tol)) return std::nullopt;
    }
    auto points = decompose_patterns(b, *ks, flows);
    if (!points) return std::nullopt;
    sol.blocks[b.id] = std::move(*points);
  }
  sol.objective = solution_cost(model, sol);
  if (const auto problems = verify_solution(model, sol); !problems.empty()) {
    logger()->debug("weights encode an infeasible integer point: {}", problems.front());
    return std::nullopt;
  }
  return sol;
}

}  // namespace cgbp
