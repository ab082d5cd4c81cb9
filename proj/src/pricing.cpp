#include "cgbp/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>
#include <stdexcept>

#include "cgbp/knapsack.hpp"
#include "cgbp/log.hpp"
#include "cgbp/paths.hpp"

#include <spdlog/spdlog.h>

namespace cgbp {

PricingRequest make_request(const RmpState& rmp, int block, const DualPrices& duals,
                            PricingMode mode, int max_columns, double rc_tolerance) {
  const CompactModel& model = *rmp.model;
  const Block& b = model.block(block);
  PricingRequest req;
  req.model = &model;
  req.block = &rmp.blocks[block];
  req.prices = block_variable_prices(rmp, block, duals);
  req.sigma = duals.convexity[block];
  req.lower.assign(rmp.bounds.lower.begin() + b.first_var,
                   rmp.bounds.lower.begin() + b.first_var + b.num_vars);
  req.upper.assign(rmp.bounds.upper.begin() + b.first_var,
                   rmp.bounds.upper.begin() + b.first_var + b.num_vars);
  for (std::size_t k = 0; k < rmp.branches.size(); ++k) {
    const auto& br = rmp.branches[k];
    if (br.block != block) continue;
    if (const auto* arc = std::get_if<KnapsackArc>(&br.target)) {
      req.arc_duals[*arc] += duals.branching[k];
    }
  }
  req.mode = mode;
  req.max_columns = max_columns;
  req.rc_tolerance = rc_tolerance;
  req.aggregated = b.aggregated();
  return req;
}

double point_reduced_cost(const PricingRequest& request,
                          const std::vector<double>& values) {
  double rc = -request.sigma;
  for (std::size_t k = 0; k < values.size(); ++k) rc += request.prices[k] * values[k];
  if (!request.arc_duals.empty()) {
    const auto* ks = std::get_if<KnapsackStructure>(&request.block->structure);
    if (ks == nullptr) throw std::logic_error("arc duals on a block without a pattern graph");
    for (const auto& arc : pattern_arcs(*ks, values)) {
      if (auto it = request.arc_duals.find(arc); it != request.arc_duals.end()) {
        rc -= it->second;
      }
    }
  }
  return rc;
}

namespace {

// Turns candidate points into the result: best value over all candidates,
// improving columns deduplicated and truncated to max_columns.
PricerResult collect(const PricingRequest& req,
                     const std::vector<std::vector<double>>& points, bool exact) {
  PricerResult out;
  out.exact = exact;
  std::set<std::uint64_t> seen;
  for (const auto& values : points) {
    const double rc = point_reduced_cost(req, values);
    out.best_reduced_cost = std::min(out.best_reduced_cost, rc);
    if (rc >= -req.rc_tolerance) continue;
    Column col = make_column(*req.model, req.block->block_id, values);
    if (!seen.insert(col.fingerprint).second) continue;
    out.columns.push_back(PricedColumn{std::move(col), rc});
  }
  std::stable_sort(out.columns.begin(), out.columns.end(),
                   [](const PricedColumn& a, const PricedColumn& b) {
                     if (a.reduced_cost != b.reduced_cost) return a.reduced_cost < b.reduced_cost;
                     return a.column.fingerprint < b.column.fingerprint;
                   });
  if (static_cast<int>(out.columns.size()) > req.max_columns) {
    out.columns.resize(req.max_columns);
  }
  return out;
}

bool bounds_empty(const PricingRequest& req) {
  for (int k = 0; k < req.block->num_vars(); ++k) {
    double lo = req.lower[k];
    double hi = req.upper[k];
    if (req.block->is_integer[k]) {
      lo = std::ceil(lo - 1e-9);
      hi = std::floor(hi + 1e-9);
    }
    if (lo > hi + 1e-9) return true;
  }
  return false;
}

}  // namespace

PricerResult GenericPricer::price(const PricingRequest& req) const {
  if (req.mode == PricingMode::kHeuristic) return {};
  if (!req.arc_duals.empty()) {
    throw std::logic_error("generic pricing cannot account for pattern-graph duals");
  }
  const BlockSubmodel& blk = *req.block;
  const int n = blk.num_vars();
  PricerResult infeasible;
  infeasible.exact = true;
  if (bounds_empty(req)) return infeasible;

  LpProblem lp;
  lp.costs = req.prices;
  for (const auto& row : blk.rows) {
    std::vector<double> coeffs(n, 0.0);
    for (const auto& t : row.terms) coeffs[t.var] += t.coef;
    lp.add_row(std::move(coeffs), row.relation, row.rhs);
  }
  struct Node {
    std::vector<double> lower;
    std::vector<double> upper;
  };
  std::vector<Node> stack;
  {
    Node root{req.lower, req.upper};
    for (int k = 0; k < n; ++k) {
      if (blk.is_integer[k]) {
        root.lower[k] = std::ceil(root.lower[k] - 1e-9);
        root.upper[k] = std::floor(root.upper[k] + 1e-9);
      }
    }
    stack.push_back(std::move(root));
  }

  constexpr int kNodeLimit = 200000;
  std::vector<std::vector<double>> points;
  double incumbent = kInf;
  int explored = 0;
  bool complete = true;
  while (!stack.empty()) {
    if (++explored > kNodeLimit) {
      complete = false;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    lp.lower = node.lower;
    lp.upper = node.upper;
    const LpSolution sol = solve_lp(lp);
    if (sol.status == LpStatus::kInfeasible) continue;
    if (sol.status == LpStatus::kUnbounded) {
      throw std::runtime_error("block " + std::to_string(blk.block_id) +
                               " is unbounded under the current prices");
    }
    if (sol.status != LpStatus::kOptimal) {
      complete = false;
      continue;
    }
    if (sol.objective >= incumbent - 1e-9) continue;
    int branch_var = -1;
    double best_frac = 0.0;
    for (int k = 0; k < n; ++k) {
      if (!blk.is_integer[k]) continue;
      const double f = sol.primal[k] - std::floor(sol.primal[k]);
      const double dist = std::min(f, 1.0 - f);
      if (dist > 1e-7 && dist > best_frac + 1e-12) {
        best_frac = dist;
        branch_var = k;
      }
    }
    if (branch_var < 0) {
      std::vector<double> values = sol.primal;
      for (int k = 0; k < n; ++k) {
        if (blk.is_integer[k]) values[k] = std::round(values[k]);
      }
      if (block_violation(blk, values) <= 1e-7) {
        incumbent = std::min(incumbent, sol.objective);
        points.push_back(std::move(values));
      }
      continue;
    }
    const double v = sol.primal[branch_var];
    Node down = node;
    Node up = std::move(node);
    down.upper[branch_var] = std::floor(v);
    up.lower[branch_var] = std::ceil(v);
    // Explore the nearer side first.
    if (v - std::floor(v) < 0.5) {
      stack.push_back(std::move(up));
      stack.push_back(std::move(down));
    } else {
      stack.push_back(std::move(down));
      stack.push_back(std::move(up));
    }
  }
  if (!complete) {
    logger()->warn("generic pricing of block {} hit its node limit; result not certified",
                   blk.block_id);
  }
  return collect(req, points, complete);
}

namespace {

struct KnapsackView {
  const KnapsackStructure* ks = nullptr;
  bool usable = false;
};

KnapsackView knapsack_view(const BlockSubmodel& blk) {
  KnapsackView view;
  const auto* ks = std::get_if<KnapsackStructure>(&blk.structure);
  if (ks == nullptr || blk.rows.size() != 1) return view;
  const int n = blk.num_vars();
  const int items = static_cast<int>(ks->item_vars.size());
  if (static_cast<int>(ks->sizes.size()) != items) return view;
  if (items + (ks->roll_var >= 0 ? 1 : 0) != n) return view;
  std::vector<double> expected(n, 0.0);
  std::vector<bool> covered(n, false);
  for (int i = 0; i < items; ++i) {
    const int v = ks->item_vars[i];
    if (v < 0 || v >= n || covered[v] || !blk.is_integer[v]) return view;
    covered[v] = true;
    expected[v] = ks->sizes[i];
  }
  double rhs = ks->capacity;
  if (ks->roll_var >= 0) {
    const int y = ks->roll_var;
    if (y >= n || covered[y] || !blk.is_integer[y]) return view;
    if (blk.lower[y] < 0.0 || blk.upper[y] > 1.0) return view;
    covered[y] = true;
    expected[y] = -ks->capacity;
    rhs = 0.0;
  }
  const Row& row = blk.rows.front();
  if (row.relation != Relation::kLessEqual || std::abs(row.rhs - rhs) > 1e-9) return view;
  std::vector<double> actual(n, 0.0);
  for (const auto& t : row.terms) actual[t.var] += t.coef;
  for (int k = 0; k < n; ++k) {
    if (std::abs(actual[k] - expected[k]) > 1e-9) return view;
  }
  view.ks = ks;
  view.usable = true;
  return view;
}

}  // namespace

PricerResult KnapsackPricer::price(const PricingRequest& req) const {
  const KnapsackView view = knapsack_view(*req.block);
  if (!view.usable) {
    logger()->debug("block {} does not match its knapsack structure; using generic pricing",
                    req.block->block_id);
    return GenericPricer().price(req);
  }
  const KnapsackStructure& ks = *view.ks;
  const int n = static_cast<int>(ks.item_vars.size());
  const int nv = req.block->num_vars();
  PricerResult infeasible;
  infeasible.exact = true;
  if (bounds_empty(req)) return infeasible;

  std::vector<int> lo(n), hi(n);
  std::vector<double> profit(n);
  for (int i = 0; i < n; ++i) {
    const int v = ks.item_vars[i];
    lo[i] = static_cast<int>(std::ceil(req.lower[v] - 1e-9));
    const double cap = ks.capacity / ks.sizes[i];
    hi[i] = static_cast<int>(std::min(cap, std::floor(req.upper[v] + 1e-9)));
    profit[i] = -req.prices[v];
  }
  int y_lo = 1, y_hi = 1;
  if (ks.roll_var >= 0) {
    y_lo = static_cast<int>(std::ceil(req.lower[ks.roll_var] - 1e-9));
    y_hi = static_cast<int>(std::floor(req.upper[ks.roll_var] + 1e-9));
  }

  auto to_values = [&](const std::vector<int>& counts, int y) {
    std::vector<double> values(nv, 0.0);
    for (int i = 0; i < n; ++i) values[ks.item_vars[i]] = counts[i];
    if (ks.roll_var >= 0) values[ks.roll_var] = y;
    return values;
  };
  // Cheapest admissible roll value for a pattern, or -1.
  auto roll_for = [&](bool empty) {
    if (ks.roll_var < 0) return 1;
    if (!empty) return y_hi >= 1 ? 1 : -1;
    if (y_lo == y_hi) return y_lo;
    return req.prices[ks.roll_var] < 0.0 ? 1 : 0;
  };

  std::vector<std::vector<double>> points;
  if (req.mode == PricingMode::kExact) {
    const int capacity = y_hi >= 1 ? ks.capacity : 0;
    std::map<KnapsackArc, double> bonus = req.arc_duals;
    const auto patterns = knapsack_dp_layered(ks.sizes, profit, capacity, lo, hi, bonus, -1);
    for (const auto& p : patterns) {
      const int y = roll_for(p.load == 0);
      if (y < 0) continue;
      points.push_back(to_values(p.counts, y));
    }
    return collect(req, points, true);
  }

  // Greedy fill by profit per unit size, once from each starting item.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return profit[a] / ks.sizes[a] > profit[b] / ks.sizes[b];
  });
  if (y_hi < 1) return PricerResult{};
  for (int start = 0; start < n; ++start) {
    std::vector<int> counts = lo;
    int load = 0;
    for (int i = 0; i < n; ++i) load += counts[i] * ks.sizes[i];
    if (load > ks.capacity) break;
    std::vector<int> seq{order[start]};
    for (int i : order) {
      if (i != order[start]) seq.push_back(i);
    }
    for (int i : seq) {
      if (profit[i] <= 0.0) continue;
      const int extra = std::min(hi[i] - counts[i], (ks.capacity - load) / ks.sizes[i]);
      if (extra <= 0) continue;
      counts[i] += extra;
      load += extra * ks.sizes[i];
    }
    const int y = roll_for(load == 0);
    if (y >= 0) points.push_back(to_values(counts, y));
  }
  PricerResult out = collect(req, points, false);
  return out;
}

namespace {

struct PathView {
  const PathStructure* ps = nullptr;
  bool usable = false;
};

PathView path_view(const BlockSubmodel& blk) {
  PathView view;
  const auto* ps = std::get_if<PathStructure>(&blk.structure);
  if (ps == nullptr || ps->arcs.size() != ps->arc_vars.size()) return view;
  if (static_cast<int>(ps->arc_vars.size()) != blk.num_vars()) return view;
  std::vector<bool> covered(blk.num_vars(), false);
  for (int v : ps->arc_vars) {
    if (v < 0 || v >= blk.num_vars() || covered[v] || !blk.is_integer[v]) return view;
    if (blk.lower[v] < 0.0 || blk.upper[v] > 1.0) return view;
    covered[v] = true;
  }
  view.ps = ps;
  view.usable = true;
  return view;
}

}  // namespace

PricerResult PathPricer::price(const PricingRequest& req) const {
  const PathView view = path_view(*req.block);
  if (!view.usable) return GenericPricer().price(req);
  const PathStructure& ps = *view.ps;
  const int m = static_cast<int>(ps.arcs.size());
  std::vector<double> arc_price(m);
  std::vector<bool> allowed(m);
  bool forced = false;
  bool negative = false;
  for (int a = 0; a < m; ++a) {
    const int v = ps.arc_vars[a];
    arc_price[a] = req.prices[v];
    allowed[a] = req.upper[v] >= 0.5;
    forced = forced || req.lower[v] >= 0.5;
    negative = negative || (allowed[a] && arc_price[a] < -1e-12);
  }
  if (forced || negative) {
    if (req.mode == PricingMode::kHeuristic) return {};
    return GenericPricer().price(req);
  }

  const Digraph graph(ps.num_nodes, ps.arcs);
  std::vector<PricedPath> paths;
  if (req.mode == PricingMode::kExact) {
    const double limit = ps.max_hops < 0 ? kInf : ps.max_hops;
    paths = rcsp_label_setting(graph, arc_price, {}, limit, ps.source, ps.sink,
                               std::max(1, req.max_columns), allowed);
  } else {
    paths = k_shortest_paths(graph, arc_price, ps.source, ps.sink,
                             std::max(1, 2 * req.max_columns), allowed);
    if (ps.max_hops >= 0) {
      std::erase_if(paths, [&](const PricedPath& p) {
        return static_cast<int>(p.arcs.size()) > ps.max_hops;
      });
    }
  }
  std::vector<std::vector<double>> points;
  for (const auto& p : paths) {
    std::vector<double> values(req.block->num_vars(), 0.0);
    for (int a : p.arcs) values[ps.arc_vars[a]] = 1.0;
    points.push_back(std::move(values));
  }
  PricerResult out = collect(req, points, req.mode == PricingMode::kExact);
  return out;
}

PricerSet::PricerSet()
    : generic_(std::make_shared<GenericPricer>()),
      knapsack_(std::make_shared<KnapsackPricer>()),
      path_(std::make_shared<PathPricer>()) {}

void PricerSet::set_override(int block, std::shared_ptr<const Pricer> pricer) {
  overrides_[block] = std::move(pricer);
}

const Pricer& PricerSet::for_block(const BlockSubmodel& block) const {
  if (auto it = overrides_.find(block.block_id); it != overrides_.end()) return *it->second;
  switch (block.tag) {
    case StructureTag::kKnapsack: return *knapsack_;
    case StructureTag::kPath: return *path_;
    case StructureTag::kGeneric: break;
  }
  return *generic_;
}

PricerResult price_block(const RmpState& rmp, int block, const DualPrices& duals,
                         const PricerSet& pricers, PricingMode mode,
                         int max_columns, double rc_tolerance) {
  const PricingRequest req = make_request(rmp, block, duals, mode, max_columns, rc_tolerance);
  return pricers.for_block(rmp.blocks[block]).price(req);
}

std::vector<PricerResult> price_all(const RmpState& rmp, const DualPrices& duals,
                                    const PricerSet& pricers, PricingMode mode,
                                    int max_columns, double rc_tolerance,
                                    bool parallel) {
  const int nb = rmp.model->num_blocks();
  std::vector<PricerResult> results(nb);
  if (parallel && nb > 1) {
    std::vector<std::future<PricerResult>> futures;
    futures.reserve(nb);
    for (int b = 0; b < nb; ++b) {
      futures.push_back(std::async(std::launch::async, [&, b] {
        return price_block(rmp, b, duals, pricers, mode, max_columns, rc_tolerance);
      }));
    }
    for (int b = 0; b < nb; ++b) results[b] = futures[b].get();
  } else {
    for (int b = 0; b < nb; ++b) {
      results[b] = price_block(rmp, b, duals, pricers, mode, max_columns, rc_tolerance);
    }
  }
  return results;
}

}  // namespace cgbp
