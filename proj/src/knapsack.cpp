#include "cgbp/knapsack.hpp"

#include <algorithm>
#include <stdexcept>

namespace cgbp {

std::vector<KnapsackPattern> knapsack_dp_layered(
    const std::vector<int>& sizes, const std::vector<double>& profits,
    int capacity, const std::vector<int>& lower, const std::vector<int>& upper,
    const std::map<KnapsackArc, double>& arc_bonus, int max_patterns) {
  const int n = static_cast<int>(sizes.size());
  if (static_cast<int>(profits.size()) != n) {
    throw std::invalid_argument("knapsack: sizes and profits differ in length");
  }
  if (capacity < 0) throw std::invalid_argument("knapsack: negative capacity");
  for (int s : sizes) {
    if (s <= 0) throw std::invalid_argument("knapsack: sizes must be positive");
  }
  const int width = capacity + 1;
  constexpr double kUnreached = -kInf;
  // value[i][load]: best profit over the first i items filling exactly load.
  std::vector<std::vector<double>> value(n + 1, std::vector<double>(width, kUnreached));
  std::vector<std::vector<int>> taken(n + 1, std::vector<int>(width, 0));
  value[0][0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int lo = lower.empty() ? 0 : lower[i];
    const int hi = upper.empty() ? capacity / sizes[i] : upper[i];
    for (int load = 0; load < width; ++load) {
      if (value[i][load] == kUnreached) continue;
      const int fit = std::min(hi, (capacity - load) / sizes[i]);
      for (int c = lo; c <= fit; ++c) {
        double v = value[i][load] + c * profits[i];
        if (!arc_bonus.empty()) {
          if (auto it = arc_bonus.find(KnapsackArc{i, load, c}); it != arc_bonus.end()) {
            v += it->second;
          }
        }
        const int next = load + c * sizes[i];
        if (v > value[i + 1][next]) {
          value[i + 1][next] = v;
          taken[i + 1][next] = c;
        }
      }
    }
  }

  std::vector<KnapsackPattern> patterns;
  for (int load = 0; load < width; ++load) {
    if (value[n][load] == kUnreached) continue;
    KnapsackPattern p;
    p.counts.assign(n, 0);
    p.load = load;
    p.value = value[n][load];
    int cur = load;
    for (int i = n; i > 0; --i) {
      p.counts[i - 1] = taken[i][cur];
      cur -= taken[i][cur] * sizes[i - 1];
    }
    patterns.push_back(std::move(p));
  }
  std::stable_sort(patterns.begin(), patterns.end(),
                   [](const KnapsackPattern& a, const KnapsackPattern& b) {
                     return a.value > b.value;
                   });
  if (max_patterns >= 0 && static_cast<int>(patterns.size()) > max_patterns) {
    patterns.resize(max_patterns);
  }
  return patterns;
}

KnapsackPattern knapsack_dp(const std::vector<int>& sizes,
                            const std::vector<double>& profits, int capacity,
                            const std::vector<int>& upper) {
  auto best = knapsack_dp_layered(sizes, profits, capacity, {}, upper, {}, 1);
  if (best.empty()) return {};
  return best.front();
}

}  // namespace cgbp
