#pragma once

// Test-only reference computations. Nothing here calls the simplex, the
// master or the pricers: they exist to check those.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cgbp/apps.hpp"
#include "cgbp/lp_core.hpp"

namespace support {

inline std::string data_path(const std::string& name) { return std::string(CGBP_DATA_DIR) + "/" + name; }

// Solves the square system M z = b by Gaussian elimination with partial
// pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> m,
                                                       std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    if (std::abs(m[piv][c]) < 1e-10) return std::nullopt;
    std::swap(m[piv], m[c]);
    std::swap(b[piv], b[c]);
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      if (f == 0.0) continue;
      for (int k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      b[r] -= f * b[c];
    }
  }
  for (int c = 0; c < n; ++c) b[c] /= m[c][c];
  return b;
}

struct VertexOptimum {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
};

// Minimum of a bounded LP by visiting every basic solution: each choice of
// n linearly independent constraints (rows or finite bounds) held tight.
// Only for tiny problems whose feasible region is bounded.
inline VertexOptimum vertex_enumeration(const cgbp::LpProblem& p, double tol = 1e-9) {
  const int n = p.num_vars();
  std::vector<std::vector<double>> a;
  std::vector<double> rhs;
  for (const auto& row : p.rows) {
    a.push_back(row.coeffs);
    rhs.push_back(row.rhs);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    if (std::isfinite(p.lower_bound(j))) {
      a.push_back(e);
      rhs.push_back(p.lower_bound(j));
    }
    if (std::isfinite(p.upper_bound(j))) {
      a.push_back(e);
      rhs.push_back(p.upper_bound(j));
    }
  }
  auto feasible = [&](const std::vector<double>& x) {
    for (int j = 0; j < n; ++j) {
      if (x[j] < p.lower_bound(j) - tol || x[j] > p.upper_bound(j) + tol) return false;
    }
    for (const auto& row : p.rows) {
      double act = 0.0;
      for (int j = 0; j < n; ++j) act += row.coeffs[j] * x[j];
      const double scale = tol * (1.0 + std::abs(row.rhs));
      if (row.relation == cgbp::Relation::kLessEqual && act > row.rhs + scale) return false;
      if (row.relation == cgbp::Relation::kGreaterEqual && act < row.rhs - scale) return false;
      if (row.relation == cgbp::Relation::kEqual && std::abs(act - row.rhs) > scale) return false;
    }
    return true;
  };
  VertexOptimum best;
  const int total = static_cast<int>(a.size());
  std::vector<int> pick;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(pick.size()) == n) {
      std::vector<std::vector<double>> m;
      std::vector<double> b;
      for (int i : pick) {
        m.push_back(a[i]);
        b.push_back(rhs[i]);
      }
      auto x = solve_square(m, b);
      if (!x || !feasible(*x)) return;
      double obj = 0.0;
      for (int j = 0; j < n; ++j) obj += p.costs[j] * (*x)[j];
      if (!best.feasible || obj < best.objective - 1e-12) {
        best.feasible = true;
        best.objective = obj;
        best.x = *x;
      }
      return;
    }
    for (int i = start; i < total; ++i) {
      pick.push_back(i);
      rec(i + 1);
      pick.pop_back();
    }
  };
  if (n == 0) {
    best.feasible = feasible({});
    return best;
  }
  rec(0);
  return best;
}

// All cutting patterns (counts per item, bounded by demand) of a roll.
inline std::vector<std::vector<int>> cutting_patterns(const cgbp::CuttingStockInstance& inst) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(inst.items.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int room) {
    if (i == inst.items.size()) {
      out.push_back(cur);
      return;
    }
    for (int c = 0; c <= inst.items[i].demand && c * inst.items[i].size <= room; ++c) {
      cur[i] = c;
      rec(i + 1, room - c * inst.items[i].size);
    }
    cur[i] = 0;
  };
  rec(0, inst.roll_width);
  return out;
}

// Fewest rolls covering every demand, by memoized search over residual
// demands with the first unmet item forced into the next roll.
inline int cutting_stock_optimum(const cgbp::CuttingStockInstance& inst) {
  const auto patterns = cutting_patterns(inst);
  const std::size_t n = inst.items.size();
  std::vector<int> radix(n + 1, 1);
  for (std::size_t i = 0; i < n; ++i) radix[i + 1] = radix[i] * (inst.items[i].demand + 1);
  std::vector<int> memo(radix[n], -1);
  std::function<int(std::vector<int>&)> best = [&](std::vector<int>& need) -> int {
    int key = 0;
    std::size_t first = n;
    for (std::size_t i = 0; i < n; ++i) {
      key += need[i] * radix[i];
      if (need[i] > 0 && first == n) first = i;
    }
    if (first == n) return 0;
    if (memo[key] >= 0) return memo[key];
    int value = 1 << 29;
    for (const auto& p : patterns) {
      if (p[first] == 0) continue;
      std::vector<int> rest = need;
      for (std::size_t i = 0; i < n; ++i) rest[i] = std::max(0, rest[i] - p[i]);
      value = std::min(value, 1 + best(rest));
    }
    memo[key] = value;
    return value;
  };
  std::vector<int> need;
  for (const auto& it : inst.items) need.push_back(it.demand);
  return best(need);
}

// Simple source-to-sink paths as arc index lists, in DFS order.
inline std::vector<std::vector<int>> simple_paths(const cgbp::NetPathInstance& inst, int src,
                                                  int dst, int max_hops = -1) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::vector<bool> seen(inst.nodes, false);
  std::function<void(int)> rec = [&](int v) {
    if (v == dst) {
      out.push_back(cur);
      return;
    }
    if (max_hops >= 0 && static_cast<int>(cur.size()) >= max_hops) return;
    seen[v] = true;
    for (int a = 0; a < static_cast<int>(inst.arcs.size()); ++a) {
      const auto& arc = inst.arcs[a];
      if (arc.from != v || seen[arc.to]) continue;
      cur.push_back(a);
      rec(arc.to);
      cur.pop_back();
    }
    seen[v] = false;
  };
  rec(src);
  return out;
}

// Cheapest assignment of one simple path per task within arc capacities;
// nullopt when none exists.
inline std::optional<double> net_path_optimum(const cgbp::NetPathInstance& inst) {
  std::vector<std::vector<std::vector<int>>> paths;
  for (const auto& t : inst.tasks) paths.push_back(simple_paths(inst, t.src, t.dst, t.max_hops));
  std::vector<int> load(inst.arcs.size(), 0);
  std::optional<double> best;
  std::function<void(std::size_t, double)> rec = [&](std::size_t k, double cost) {
    if (best && cost >= *best) return;
    if (k == inst.tasks.size()) {
      best = cost;
      return;
    }
    const int d = inst.tasks[k].demand;
    for (const auto& p : paths[k]) {
      bool fits = true;
      double c = 0.0;
      for (int a : p) {
        fits = fits && load[a] + d <= inst.arcs[a].capacity;
        c += d * inst.arcs[a].cost;
      }
      if (!fits) continue;
      for (int a : p) load[a] += d;
      rec(k + 1, cost + c);
      for (int a : p) load[a] -= d;
    }
  };
  rec(0, 0.0);
  return best;
}

}  // namespace support
