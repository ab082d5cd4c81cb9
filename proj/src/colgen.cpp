#include "cgbp/colgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "cgbp/knapsack.hpp"
#include "cgbp/log.hpp"

namespace cgbp {

const char* to_string(CgTermination termination) {
  switch (termination) {
    case CgTermination::kConverged: return "Converged";
    case CgTermination::kIterationCap: return "IterationCap";
    case CgTermination::kTimeLimit: return "TimeLimit";
    case CgTermination::kStalled: return "Stalled";
    case CgTermination::kBlockInfeasible: return "BlockInfeasible";
  }
  return "?";
}

double lagrangian_bound(double lrmp_objective, const std::vector<double>& best_rc,
                        const std::vector<int>& multiplicity, bool exact) {
  if (!exact) {
    throw std::logic_error("Lagrangian bound needs certified pricing minima");
  }
  if (best_rc.size() != multiplicity.size()) {
    throw std::invalid_argument("one reduced cost and multiplicity per block expected");
  }
  double lb = lrmp_objective;
  for (std::size_t b = 0; b < best_rc.size(); ++b) {
    lb += multiplicity[b] > 0 ? multiplicity[b] * std::min(best_rc[b], 0.0) : best_rc[b];
  }
  return lb;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

CgResult run_cg(RmpState& rmp, const PricerSet& pricers, const CgConfig& config) {
  if (!(config.rc_tolerance > 0.0) || config.max_iterations < 1) {
    throw std::invalid_argument("CG needs rc_tolerance > 0 and max_iterations >= 1");
  }
  const auto start = Clock::now();
  const CompactModel& model = *rmp.model;
  std::vector<int> multiplicity;
  for (const auto& b : model.blocks) multiplicity.push_back(b.multiplicity);

  CgResult result;
  LrmpSolution lrmp;
  for (;;) {
    lrmp = solve_lrmp(rmp);
    if (lrmp.status != LpStatus::kOptimal) {
      throw std::runtime_error(std::string("LRMP solve ended with status ") +
                               to_string(lrmp.status));
    }
    if (result.iterations >= config.max_iterations) {
      result.termination = CgTermination::kIterationCap;
      break;
    }
    if (config.time_limit_s > 0.0 && ms_since(start) > 1000.0 * config.time_limit_s) {
      result.termination = CgTermination::kTimeLimit;
      break;
    }
    ++result.iterations;

    CgIteration it;
    it.iteration = result.iterations;
    it.lrmp_objective = lrmp.objective;
    it.lagrangian_lb = std::numeric_limits<double>::quiet_NaN();

    auto run_round = [&](PricingMode mode) {
      auto results = price_all(rmp, lrmp.duals, pricers, mode, config.columns_per_round,
                               config.rc_tolerance, config.parallel_pricing);
      std::vector<Column> columns;
      double best = kInf;
      for (auto& r : results) {
        best = std::min(best, r.best_reduced_cost);
        // Insertion order: block id, then fingerprint.
        std::vector<Column> block_cols;
        for (auto& pc : r.columns) block_cols.push_back(std::move(pc.column));
        std::sort(block_cols.begin(), block_cols.end(),
                  [](const Column& a, const Column& b) { return a.fingerprint < b.fingerprint; });
        for (auto& c : block_cols) columns.push_back(std::move(c));
      }
      const int found = static_cast<int>(columns.size());
      const int added = add_columns(rmp, std::move(columns));
      return std::tuple{std::move(results), best, found, added};
    };

    bool exact_round = !config.heuristic_then_exact;
    auto [results, best, found, added] =
        run_round(exact_round ? PricingMode::kExact : PricingMode::kHeuristic);
    if (!exact_round && added == 0) {
      exact_round = true;
      std::tie(results, best, found, added) = run_round(PricingMode::kExact);
    }
    it.best_reduced_cost = best;
    it.columns_added = added;
    it.exact = exact_round;
    result.columns_generated += added;

    bool infeasible_block = false;
    if (exact_round) {
      bool certified = true;
      std::vector<double> best_rc;
      for (const auto& r : results) {
        certified = certified && r.exact;
        best_rc.push_back(r.best_reduced_cost);
      }
      for (const auto& b : model.blocks) {
        if (!b.aggregated() && results[b.id].exact && results[b.id].best_reduced_cost == kInf) {
          infeasible_block = true;
        }
      }
      if (certified) {
        it.lagrangian_lb = lagrangian_bound(lrmp.objective, best_rc, multiplicity, true);
        result.lagrangian_lb = std::max(result.lagrangian_lb, it.lagrangian_lb);
      }
      it.wall_ms = ms_since(start);
      result.trace.push_back(it);
      logger()->debug("cg iter {} obj {:.9g} best rc {:.3g} lb {:.9g} added {}", it.iteration,
                      it.lrmp_objective, it.best_reduced_cost, it.lagrangian_lb, added);
      if (infeasible_block) {
        result.termination = CgTermination::kBlockInfeasible;
        break;
      }
      if (certified && best >= -config.rc_tolerance) {
        result.termination = CgTermination::kConverged;
        break;
      }
      if (added == 0) {
        result.termination = CgTermination::kStalled;
        logger()->warn("column generation stalled: {} improving columns were all duplicates",
                       found);
        break;
      }
      continue;
    }
    it.wall_ms = ms_since(start);
    result.trace.push_back(it);
    logger()->debug("cg iter {} obj {:.9g} heuristic best rc {:.3g} added {}", it.iteration,
                    it.lrmp_objective, it.best_reduced_cost, added);
  }

  result.objective = lrmp.objective;
  result.duals = lrmp.duals;
  result.weights = lrmp.weights;
  result.artificial_active = recover_original_solution(rmp, lrmp.weights).artificial_active;
  result.wall_ms = ms_since(start);
  return result;
}

namespace {

double activity_of(const Row& row, const CompactModel& model, int block,
                   const std::vector<double>& values) {
  const Block& b = model.blocks[block];
  double a = 0.0;
  for (const auto& t : row.terms) {
    if (b.contains(t.var)) a += t.coef * values[t.var - b.first_var];
  }
  return a;
}

// Cheapest point of a convexity block that fits in the residual room of
// every <= linking row (and the <= side of equalities).
std::optional<std::vector<double>> repair_block(const RmpState& rmp, int block,
                                                const std::vector<double>& room) {
  const CompactModel& model = *rmp.model;
  const Block& b = model.blocks[block];
  BlockSubmodel sub = rmp.blocks[block];
  for (int r = 0; r < model.num_linking_rows(); ++r) {
    const Row& row = model.linking_rows[r];
    if (row.relation == Relation::kGreaterEqual) continue;
    Row local;
    local.name = row.name;
    local.relation = Relation::kLessEqual;
    local.rhs = room[r];
    for (const auto& t : row.terms) {
      if (b.contains(t.var)) local.terms.push_back(Term{t.var - b.first_var, t.coef});
    }
    if (!local.terms.empty()) sub.rows.push_back(std::move(local));
  }
  PricingRequest req;
  req.model = &model;
  req.block = &sub;
  req.prices = sub.costs;
  req.lower.assign(rmp.bounds.lower.begin() + b.first_var,
                   rmp.bounds.lower.begin() + b.first_var + b.num_vars);
  req.upper.assign(rmp.bounds.upper.begin() + b.first_var,
                   rmp.bounds.upper.begin() + b.first_var + b.num_vars);
  // Accept any point: the tolerance makes every finite reduced cost improving.
  req.rc_tolerance = -kInf;
  req.max_columns = 1;
  const PricerResult res = GenericPricer().price(req);
  if (res.columns.empty()) return std::nullopt;
  return res.columns.front().column.original_values;
}

bool fits(const CompactModel& model, const std::vector<double>& room, int block,
          const std::vector<double>& values) {
  for (int r = 0; r < model.num_linking_rows(); ++r) {
    const Row& row = model.linking_rows[r];
    if (row.relation == Relation::kGreaterEqual) continue;
    if (activity_of(row, model, block, values) > room[r] + 1e-9) return false;
  }
  return true;
}

}  // namespace

RoundingOutcome round_to_integer(const RmpState& rmp, const CgResult& result) {
  RoundingOutcome out;
  const CompactModel& model = *rmp.model;
  const double tol = rmp.config.tol_int;
  const RecoveredSolution rec = recover_original_solution(rmp, result.weights);
  if (rec.artificial_active) {
    out.failure = "artificial columns are active";
    return out;
  }
  if (auto sol = integer_solution(rmp, result.weights)) {
    out.solution = std::move(sol);
    return out;
  }

  IntegerSolution sol;
  sol.blocks.resize(model.num_blocks());
  std::vector<double> room(model.num_linking_rows());
  for (int r = 0; r < model.num_linking_rows(); ++r) room[r] = model.linking_rows[r].rhs;
  auto consume = [&](int block, const std::vector<double>& values, int count) {
    for (int r = 0; r < model.num_linking_rows(); ++r) {
      room[r] -= count * activity_of(model.linking_rows[r], model, block, values);
    }
  };

  // Convexity blocks: most decided blocks first.
  std::vector<int> order;
  for (const auto& b : model.blocks) {
    if (!b.aggregated()) order.push_back(b.id);
  }
  auto top_weight = [&](int b) {
    double w = 0.0;
    for (const auto& [j, wj] : rec.blocks[b].columns) w = std::max(w, wj);
    return w;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return top_weight(a) > top_weight(b); });
  for (int b : order) {
    auto cols = rec.blocks[b].columns;
    std::stable_sort(cols.begin(), cols.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });
    std::optional<std::vector<double>> chosen;
    for (const auto& [j, w] : cols) {
      const auto& values = rmp.pool[j].original_values;
      if (w >= 1.0 - tol || fits(model, room, b, values)) {
        chosen = values;
        break;
      }
    }
    if (!chosen) chosen = repair_block(rmp, b, room);
    if (!chosen) {
      out.failure = "no point of block " + std::to_string(b) + " fits the residual capacities";
      return out;
    }
    consume(b, *chosen, 1);
    sol.blocks[b].push_back(BlockPoint{*chosen, 1});
  }

  // Aggregated blocks: floor, then round up by decreasing fractional part
  // while some >= row is short, then fill the rest by knapsack.
  for (const auto& b : model.blocks) {
    if (!b.aggregated()) continue;
    std::map<std::vector<double>, int> counts;
    std::vector<std::pair<double, int>> fractional;  // (fraction, pool index)
    for (const auto& [j, w] : rec.blocks[b.id].columns) {
      const double fl = std::floor(w + tol);
      if (fl > 0) {
        counts[rmp.pool[j].original_values] += static_cast<int>(fl);
        consume(b.id, rmp.pool[j].original_values, static_cast<int>(fl));
      }
      if (w - fl > tol) fractional.emplace_back(w - fl, j);
    }
    std::stable_sort(fractional.begin(), fractional.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    auto short_rows = [&](int block, const std::vector<double>& values) {
      for (int r = 0; r < model.num_linking_rows(); ++r) {
        const Row& row = model.linking_rows[r];
        if (row.relation == Relation::kLessEqual) continue;
        if (room[r] > 1e-9 && activity_of(row, model, block, values) > 1e-9) return true;
      }
      return false;
    };
    for (const auto& [f, j] : fractional) {
      const auto& values = rmp.pool[j].original_values;
      if (!short_rows(b.id, values) || !fits(model, room, b.id, values)) continue;
      ++counts[values];
      consume(b.id, values, 1);
    }
    const auto* ks = std::get_if<KnapsackStructure>(&b.structure);
    for (int guard = 0; guard < 100000; ++guard) {
      bool short_any = false;
      for (int r = 0; r < model.num_linking_rows(); ++r) {
        if (model.linking_rows[r].relation != Relation::kLessEqual && room[r] > 1e-9) {
          short_any = true;
        }
      }
      if (!short_any || ks == nullptr) break;
      // Fill one more copy with the items still short, by volume.
      const int n = static_cast<int>(ks->item_vars.size());
      std::vector<int> upper(n, 0);
      std::vector<double> profit(n, 0.0);
      for (int i = 0; i < n; ++i) {
        const int gv = b.first_var + ks->item_vars[i];
        double need = 0.0;
        for (int r = 0; r < model.num_linking_rows(); ++r) {
          const Row& row = model.linking_rows[r];
          if (row.relation == Relation::kLessEqual || room[r] <= 1e-9) continue;
          for (const auto& t : row.terms) {
            if (t.var == gv && t.coef > 0) need = std::max(need, std::ceil(room[r] / t.coef - 1e-9));
          }
        }
        upper[i] = static_cast<int>(std::min(need, std::floor(rmp.bounds.upper[gv] + 1e-9)));
        profit[i] = ks->sizes[i];
      }
      const KnapsackPattern p = knapsack_dp(ks->sizes, profit, ks->capacity, upper);
      if (p.load == 0) break;
      std::vector<double> values(b.num_vars, 0.0);
      for (int i = 0; i < n; ++i) values[ks->item_vars[i]] = p.counts[i];
      if (ks->roll_var >= 0) values[ks->roll_var] = 1.0;
      ++counts[values];
      consume(b.id, values, 1);
    }
    for (auto& [values, c] : counts) sol.blocks[b.id].push_back(BlockPoint{values, c});
  }

  sol.objective = solution_cost(model, sol);
  const auto problems = verify_solution(model, sol);
  if (!problems.empty()) {
    out.failure = "rounded point is infeasible: " + problems.front();
    return out;
  }
  out.solution = std::move(sol);
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<CgIteration>& trace) {
  out << "iteration,lrmp_obj,best_rc,lagrangian_lb,columns_added,wall_ms\n";
  for (const auto& it : trace) {
    const std::string lb =
        std::isnan(it.lagrangian_lb) ? std::string() : fmt::format("{:.12g}", it.lagrangian_lb);
    out << fmt::format("{},{:.12g},{:.12g},{},{},{:.3f}\n", it.iteration, it.lrmp_objective,
                       it.best_reduced_cost, lb, it.columns_added, it.wall_ms);
  }
}

}  // namespace cgbp
