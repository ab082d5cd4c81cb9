#pragma once

#include <span>
#include <vector>

#include "cgbp/model.hpp"

namespace cgbp {

struct Digraph {
  int num_nodes = 0;
  std::vector<PathArc> arcs;
  std::vector<std::vector<int>> out;  // arc indices leaving each node

  Digraph() = default;
  Digraph(int nodes, std::vector<PathArc> arc_list);
};

struct PricedPath {
  std::vector<int> arcs;  // arc indices, source to sink
  double price = 0.0;
  double resource = 0.0;
};

// Elementary source-to-sink paths of minimum total price subject to the
// summed arc resource staying within `limit`. Labels at a node are dominated
// when another label has no larger price, no larger resource and visits a
// subset of its nodes. Returns up to `max_paths` cheapest distinct paths
// among the surviving labels, cheapest first; empty when none is feasible.
// Arcs whose entry in `allowed` is false are skipped.
std::vector<PricedPath> rcsp_label_setting(const Digraph& graph,
                                           std::span<const double> prices,
                                           std::span<const double> resources,
                                           double limit, int source, int sink,
                                           int max_paths = 1,
                                           const std::vector<bool>& allowed = {});

// Yen's loopless K shortest paths, in nondecreasing price. Prices may be
// negative only when the graph has no negative cycle.
std::vector<PricedPath> k_shortest_paths(const Digraph& graph,
                                         std::span<const double> prices,
                                         int source, int sink, int k,
                                         const std::vector<bool>& allowed = {});

}  // namespace cgbp
