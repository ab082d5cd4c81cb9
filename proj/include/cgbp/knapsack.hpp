#pragma once

#include <map>
#include <vector>

#include "cgbp/master.hpp"

namespace cgbp {

struct KnapsackPattern {
  std::vector<int> counts;
  int load = 0;
  double value = 0.0;
};

// Integer vector a maximizing profits.a subject to sizes.a <= capacity and
// lower <= a <= upper (empty bound vectors mean 0 and unbounded). The layered
// form adds `arc_bonus[{i, load, c}]` whenever item i is taken c times on top
// of `load`, and returns the best pattern for every reachable final load,
// sorted by value descending (ties by load ascending), at most `max_patterns`.
std::vector<KnapsackPattern> knapsack_dp_layered(
    const std::vector<int>& sizes, const std::vector<double>& profits,
    int capacity, const std::vector<int>& lower, const std::vector<int>& upper,
    const std::map<KnapsackArc, double>& arc_bonus, int max_patterns);

// Best single pattern; nullopt-like empty counts when no pattern satisfies
// the lower bounds.
KnapsackPattern knapsack_dp(const std::vector<int>& sizes,
                            const std::vector<double>& profits, int capacity,
                            const std::vector<int>& upper = {});

}  // namespace cgbp
