#include "cgbp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

namespace cgbp::oracle {

namespace {

constexpr double kTol = 1e-9;
constexpr long kSearchBudget = 20000000;

bool row_holds(Relation rel, double activity, double rhs) {
  switch (rel) {
    case Relation::kLessEqual: return activity <= rhs + kTol;
    case Relation::kGreaterEqual: return activity >= rhs - kTol;
    case Relation::kEqual: return std::abs(activity - rhs) <= kTol;
  }
  return false;
}

// Can some completion reach the row given the remaining activity range?
bool row_reachable(Relation rel, double activity, double lo_rest, double hi_rest, double rhs) {
  switch (rel) {
    case Relation::kLessEqual: return activity + lo_rest <= rhs + kTol;
    case Relation::kGreaterEqual: return activity + hi_rest >= rhs - kTol;
    case Relation::kEqual:
      return activity + lo_rest <= rhs + kTol && activity + hi_rest >= rhs - kTol;
  }
  return false;
}

}  // namespace

std::vector<std::vector<double>> enumerate_block_points(const BlockSubmodel& block, long limit) {
  const int n = block.num_vars();
  std::vector<double> lo(n), hi(n);
  for (int k = 0; k < n; ++k) {
    if (!std::isfinite(block.lower[k]) || !std::isfinite(block.upper[k])) {
      throw std::invalid_argument("variable " + block.names[k] + " has an infinite bound");
    }
    if (block.is_integer[k]) {
      lo[k] = std::ceil(block.lower[k] - kTol);
      hi[k] = std::floor(block.upper[k] + kTol);
    } else if (block.lower[k] == block.upper[k]) {
      lo[k] = hi[k] = block.lower[k];
    } else {
      throw std::invalid_argument("variable " + block.names[k] + " is continuous");
    }
  }
  const int m = static_cast<int>(block.rows.size());
  std::vector<std::vector<double>> coef(m, std::vector<double>(n, 0.0));
  for (int r = 0; r < m; ++r) {
    for (const auto& t : block.rows[r].terms) coef[r][t.var] += t.coef;
  }
  // rest_lo[r][k]: smallest activity of variables k.. on row r.
  std::vector<std::vector<double>> rest_lo(m, std::vector<double>(n + 1, 0.0));
  std::vector<std::vector<double>> rest_hi(m, std::vector<double>(n + 1, 0.0));
  for (int r = 0; r < m; ++r) {
    for (int k = n - 1; k >= 0; --k) {
      const double a = coef[r][k] * lo[k];
      const double b = coef[r][k] * hi[k];
      rest_lo[r][k] = rest_lo[r][k + 1] + std::min(a, b);
      rest_hi[r][k] = rest_hi[r][k + 1] + std::max(a, b);
    }
  }

  std::vector<std::vector<double>> points;
  std::vector<double> x(n, 0.0);
  std::vector<double> activity(m, 0.0);
  long visited = 0;
  std::function<void(int)> dfs = [&](int k) {
    if (++visited > kSearchBudget) throw LimitExceeded("block enumeration search too large");
    if (k == n) {
      for (int r = 0; r < m; ++r) {
        if (!row_holds(block.rows[r].relation, activity[r], block.rows[r].rhs)) return;
      }
      points.push_back(x);
      if (static_cast<long>(points.size()) > limit) {
        throw LimitExceeded("block " + std::to_string(block.block_id) + " has more than " +
                            std::to_string(limit) + " points");
      }
      return;
    }
    for (double v = lo[k]; v <= hi[k] + kTol; v += 1.0) {
      x[k] = v;
      bool ok = true;
      for (int r = 0; r < m; ++r) activity[r] += coef[r][k] * v;
      for (int r = 0; r < m && ok; ++r) {
        ok = row_reachable(block.rows[r].relation, activity[r], rest_lo[r][k + 1],
                           rest_hi[r][k + 1], block.rows[r].rhs);
      }
      if (ok) dfs(k + 1);
      for (int r = 0; r < m; ++r) activity[r] -= coef[r][k] * v;
      if (lo[k] == hi[k]) break;
    }
    x[k] = 0.0;
  };
  if (lo.end() == std::mismatch(lo.begin(), lo.end(), hi.begin(),
                                [](double a, double b) { return a <= b + kTol; }).first) {
    dfs(0);
  }
  return points;
}

std::vector<Column> enumerate_extreme_points(const CompactModel& model, int block, long limit) {
  const BlockSubmodel sub = block_submodel(model, block);
  const Block& b = model.block(block);
  std::vector<Column> cols;
  for (auto& values : enumerate_block_points(sub, limit)) {
    Column col;
    col.block_id = block;
    for (int k = 0; k < b.num_vars; ++k) col.cost += model.costs[b.first_var + k] * values[k];
    col.linking_coeffs.assign(model.num_linking_rows(), 0.0);
    for (int r = 0; r < model.num_linking_rows(); ++r) {
      for (const auto& t : model.linking_rows[r].terms) {
        if (t.var >= b.first_var && t.var < b.first_var + b.num_vars) {
          col.linking_coeffs[r] += t.coef * values[t.var - b.first_var];
        }
      }
    }
    col.original_values = std::move(values);
    cols.push_back(std::move(col));
  }
  return cols;
}

FullLp full_column_lp(const CompactModel& model, const Limits& limits) {
  FullLp out;
  for (const auto& b : model.blocks) {
    auto cols = enumerate_extreme_points(model, b.id, limits.max_points);
    for (auto& c : cols) out.columns.push_back(std::move(c));
  }
  const int n = static_cast<int>(out.columns.size());
  const int num_link = model.num_linking_rows();
  std::vector<int> conv_row(model.num_blocks(), -1);
  int rows = num_link;
  for (const auto& b : model.blocks) {
    if (!b.aggregated()) conv_row[b.id] = rows++;
  }
  LpProblem lp;
  for (const auto& c : out.columns) lp.costs.push_back(c.cost);
  lp.rows.resize(rows);
  for (int r = 0; r < num_link; ++r) {
    lp.rows[r].relation = model.linking_rows[r].relation;
    lp.rows[r].rhs = model.linking_rows[r].rhs;
  }
  for (int r = num_link; r < rows; ++r) {
    lp.rows[r].relation = Relation::kEqual;
    lp.rows[r].rhs = 1.0;
  }
  for (auto& row : lp.rows) row.coeffs.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const Column& c = out.columns[j];
    for (int r = 0; r < num_link; ++r) lp.rows[r].coeffs[j] = c.linking_coeffs[r];
    if (conv_row[c.block_id] >= 0) lp.rows[conv_row[c.block_id]].coeffs[j] = 1.0;
  }
  out.lp = solve_lp(lp);
  out.weights = out.lp.primal;
  if (out.lp.status == LpStatus::kOptimal) {
    out.linking_duals.assign(out.lp.duals.begin(), out.lp.duals.begin() + num_link);
    out.convexity_duals.assign(model.num_blocks(), 0.0);
    for (const auto& b : model.blocks) {
      if (conv_row[b.id] >= 0) out.convexity_duals[b.id] = out.lp.duals[conv_row[b.id]];
    }
  }
  return out;
}

double column_reduced_cost(const Column& column, const std::vector<double>& linking_duals,
                           const std::vector<double>& convexity_duals) {
  double rc = column.cost;
  for (std::size_t r = 0; r < linking_duals.size(); ++r) {
    rc -= linking_duals[r] * column.linking_coeffs[r];
  }
  if (column.block_id >= 0 && column.block_id < static_cast<int>(convexity_duals.size())) {
    rc -= convexity_duals[column.block_id];
  }
  return rc;
}

namespace {

// Drops every point that another point beats or ties on cost and on each
// linking row in the direction the row prefers; no optimum is lost. The
// result is sorted by cost.
std::vector<Column> undominated(const CompactModel& model, std::vector<Column> points) {
  std::stable_sort(points.begin(), points.end(),
                   [](const Column& a, const Column& c) { return a.cost < c.cost; });
  const int m = model.num_linking_rows();
  auto covers = [&](const Column& q, const Column& p) {
    if (q.cost > p.cost + kTol) return false;
    for (int r = 0; r < m; ++r) {
      const double a = q.linking_coeffs[r], b = p.linking_coeffs[r];
      switch (model.linking_rows[r].relation) {
        case Relation::kLessEqual:
          if (a > b + kTol) return false;
          break;
        case Relation::kGreaterEqual:
          if (a < b - kTol) return false;
          break;
        case Relation::kEqual:
          if (std::abs(a - b) > kTol) return false;
          break;
      }
    }
    return true;
  };
  std::vector<Column> kept;
  for (auto& p : points) {
    bool beaten = false;
    for (const auto& q : kept) {
      if (covers(q, p)) {
        beaten = true;
        break;
      }
    }
    if (!beaten) kept.push_back(std::move(p));
  }
  return kept;
}

MipResult search_convexity_blocks(const CompactModel& model, const Limits& limits) {
  MipResult res;
  const int nb = model.num_blocks();
  const int m = model.num_linking_rows();
  std::vector<std::vector<Column>> points(nb);
  for (int b = 0; b < nb; ++b) {
    points[b] = undominated(model, enumerate_extreme_points(model, b, limits.max_points));
    if (points[b].empty()) return res;
  }
  // Suffix sums over blocks b.. of the cheapest cost and activity range.
  std::vector<double> rest_cost(nb + 1, 0.0);
  std::vector<std::vector<double>> rest_lo(m, std::vector<double>(nb + 1, 0.0));
  std::vector<std::vector<double>> rest_hi(m, std::vector<double>(nb + 1, 0.0));
  for (int b = nb - 1; b >= 0; --b) {
    rest_cost[b] = rest_cost[b + 1] + points[b].front().cost;
    for (int r = 0; r < m; ++r) {
      double lo = kInf, hi = -kInf;
      for (const auto& p : points[b]) {
        lo = std::min(lo, p.linking_coeffs[r]);
        hi = std::max(hi, p.linking_coeffs[r]);
      }
      rest_lo[r][b] = rest_lo[r][b + 1] + lo;
      rest_hi[r][b] = rest_hi[r][b + 1] + hi;
    }
  }
  std::vector<int> choice(nb, -1), best_choice;
  std::vector<double> activity(m, 0.0);
  double best = kInf;
  std::function<void(int, double)> dfs = [&](int b, double cost) {
    if (b == nb) {
      for (int r = 0; r < m; ++r) {
        const auto& row = model.linking_rows[r];
        if (!row_holds(row.relation, activity[r], row.rhs)) return;
      }
      if (cost < best - kTol) {
        best = cost;
        best_choice = choice;
      }
      return;
    }
    for (int i = 0; i < static_cast<int>(points[b].size()); ++i) {
      const Column& p = points[b][i];
      if (cost + p.cost + rest_cost[b + 1] >= best - kTol) break;
      if (++res.candidates > limits.max_candidates) {
        throw LimitExceeded("integer search exceeded " + std::to_string(limits.max_candidates) +
                            " candidates");
      }
      bool ok = true;
      for (int r = 0; r < m; ++r) activity[r] += p.linking_coeffs[r];
      for (int r = 0; r < m && ok; ++r) {
        const auto& row = model.linking_rows[r];
        ok = row_reachable(row.relation, activity[r], rest_lo[r][b + 1], rest_hi[r][b + 1],
                           row.rhs);
      }
      if (ok) {
        choice[b] = i;
        dfs(b + 1, cost + p.cost);
      }
      for (int r = 0; r < m; ++r) activity[r] -= p.linking_coeffs[r];
    }
  };
  dfs(0, 0.0);
  if (best_choice.empty()) return res;
  res.feasible = true;
  res.objective = best;
  res.solution.blocks.resize(nb);
  for (int b = 0; b < nb; ++b) {
    res.solution.blocks[b].push_back(BlockPoint{points[b][best_choice[b]].original_values, 1});
  }
  res.solution.objective = best;
  return res;
}

MipResult search_covering(const CompactModel& model, const Limits& limits) {
  const Block& blk = model.blocks[0];
  const int m = model.num_linking_rows();
  for (const auto& row : model.linking_rows) {
    if (row.relation != Relation::kGreaterEqual) {
      throw std::invalid_argument("aggregated search needs >= linking rows only");
    }
    for (const auto& t : row.terms) {
      if (t.coef < 0.0) throw std::invalid_argument("aggregated search needs nonnegative rows");
    }
  }
  std::vector<Column> useful;
  for (auto& p : enumerate_extreme_points(model, blk.id, limits.max_points)) {
    if (p.cost < 0.0) throw std::invalid_argument("aggregated search needs nonnegative costs");
    bool covers = false;
    for (double a : p.linking_coeffs) covers = covers || a > kTol;
    if (covers) useful.push_back(std::move(p));
  }

  struct Entry {
    double value;
    int choice;
  };
  std::map<std::vector<double>, Entry> memo;
  MipResult res;
  std::function<double(const std::vector<double>&)> solve =
      [&](const std::vector<double>& residual) -> double {
    int first = -1;
    for (int r = 0; r < m && first < 0; ++r) {
      if (residual[r] > kTol) first = r;
    }
    if (first < 0) return 0.0;
    if (auto it = memo.find(residual); it != memo.end()) return it->second.value;
    if (++res.candidates > limits.max_candidates) {
      throw LimitExceeded("covering search exceeded " + std::to_string(limits.max_candidates) +
                          " states");
    }
    Entry e{kInf, -1};
    std::vector<double> next(m);
    for (int i = 0; i < static_cast<int>(useful.size()); ++i) {
      const Column& p = useful[i];
      if (p.linking_coeffs[first] <= kTol) continue;
      for (int r = 0; r < m; ++r) next[r] = std::max(0.0, residual[r] - p.linking_coeffs[r]);
      const double v = p.cost + solve(next);
      if (v < e.value - kTol) e = Entry{v, i};
    }
    memo.emplace(residual, e);
    return e.value;
  };
  std::vector<double> rhs(m);
  for (int r = 0; r < m; ++r) rhs[r] = std::max(0.0, model.linking_rows[r].rhs);
  const double best = solve(rhs);
  if (!std::isfinite(best)) return res;

  std::map<std::vector<double>, int> multiset;
  std::vector<double> residual = rhs;
  for (;;) {
    auto it = memo.find(residual);
    if (it == memo.end()) break;  // residual fully covered
    const Column& p = useful[it->second.choice];
    ++multiset[p.original_values];
    for (int r = 0; r < m; ++r) residual[r] = std::max(0.0, residual[r] - p.linking_coeffs[r]);
  }
  res.feasible = true;
  res.objective = best;
  res.solution.blocks.resize(1);
  for (auto& [values, count] : multiset) res.solution.blocks[0].push_back(BlockPoint{values, count});
  res.solution.objective = best;
  return res;
}

}  // namespace

MipResult brute_force_mip(const CompactModel& model, const Limits& limits) {
  bool any_aggregated = false;
  for (const auto& b : model.blocks) any_aggregated = any_aggregated || b.aggregated();
  if (!any_aggregated) return search_convexity_blocks(model, limits);
  if (model.num_blocks() == 1) return search_covering(model, limits);
  throw std::invalid_argument("brute force supports all-convexity models or one aggregated block");
}

}  // namespace cgbp::oracle
