#include "cgbp/paths.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>

namespace cgbp {

Digraph::Digraph(int nodes, std::vector<PathArc> arc_list)
    : num_nodes(nodes), arcs(std::move(arc_list)), out(nodes) {
  for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
    if (arcs[a].tail < 0 || arcs[a].tail >= nodes || arcs[a].head < 0 ||
        arcs[a].head >= nodes) {
      throw std::invalid_argument("arc " + std::to_string(a) + " has an endpoint outside the graph");
    }
    out[arcs[a].tail].push_back(a);
  }
}

namespace {

constexpr double kEps = 1e-12;

struct Label {
  int node = 0;
  double price = 0.0;
  double resource = 0.0;
  std::vector<std::uint64_t> visited;
  int pred = -1;
  int arc = -1;
  bool alive = true;
};

bool visits(const Label& l, int node) {
  return (l.visited[node / 64] >> (node % 64)) & 1U;
}

bool subset_of(const Label& a, const Label& b) {
  for (std::size_t w = 0; w < a.visited.size(); ++w) {
    if ((a.visited[w] & ~b.visited[w]) != 0) return false;
  }
  return true;
}

std::vector<int> trace_arcs(const std::vector<Label>& labels, int id) {
  std::vector<int> arcs;
  for (int cur = id; labels[cur].pred >= 0; cur = labels[cur].pred) {
    arcs.push_back(labels[cur].arc);
  }
  std::reverse(arcs.begin(), arcs.end());
  return arcs;
}

bool arc_allowed(const std::vector<bool>& allowed, int a) {
  return allowed.empty() || allowed[a];
}

}  // namespace

std::vector<PricedPath> rcsp_label_setting(const Digraph& graph,
                                           std::span<const double> prices,
                                           std::span<const double> resources,
                                           double limit, int source, int sink,
                                           int max_paths,
                                           const std::vector<bool>& allowed) {
  const int m = static_cast<int>(graph.arcs.size());
  if (static_cast<int>(prices.size()) != m ||
      (!resources.empty() && static_cast<int>(resources.size()) != m)) {
    throw std::invalid_argument("rcsp: price/resource vectors do not match the arcs");
  }
  bool nonnegative = true;
  for (int a = 0; a < m; ++a) {
    if (!resources.empty() && resources[a] < 0.0) {
      throw std::invalid_argument("rcsp: negative resource consumption");
    }
    if (arc_allowed(allowed, a) && prices[a] < 0.0) nonnegative = false;
  }
  // With nonnegative prices, a walk can always be shortcut to a path that is
  // no worse in price and resource, so the visited sets can be left out of
  // the dominance test.
  const bool need_subset = !nonnegative;

  const std::size_t words = static_cast<std::size_t>(graph.num_nodes + 63) / 64;
  std::vector<Label> labels;
  std::vector<std::vector<int>> at_node(graph.num_nodes);
  using Entry = std::tuple<double, double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;

  auto push = [&](Label label) {
    const int v = label.node;
    if (v != sink) {
      for (int id : at_node[v]) {
        const Label& o = labels[id];
        if (!o.alive) continue;
        if (o.price <= label.price + kEps && o.resource <= label.resource + kEps &&
            (!need_subset || subset_of(o, label))) {
          return;
        }
      }
      for (int id : at_node[v]) {
        Label& o = labels[id];
        if (o.alive && label.price <= o.price + kEps && label.resource <= o.resource + kEps &&
            (!need_subset || subset_of(label, o))) {
          o.alive = false;
        }
      }
    }
    const int id = static_cast<int>(labels.size());
    queue.emplace(label.price, label.resource, id);
    at_node[v].push_back(id);
    labels.push_back(std::move(label));
  };

  Label start;
  start.node = source;
  start.visited.assign(words, 0);
  start.visited[source / 64] |= std::uint64_t{1} << (source % 64);
  push(std::move(start));

  std::vector<int> at_sink;
  while (!queue.empty()) {
    const int id = std::get<2>(queue.top());
    queue.pop();
    if (!labels[id].alive) continue;
    if (labels[id].node == sink) {
      at_sink.push_back(id);
      continue;
    }
    for (int a : graph.out[labels[id].node]) {
      if (!arc_allowed(allowed, a)) continue;
      const int head = graph.arcs[a].head;
      if (visits(labels[id], head)) continue;
      const double res = labels[id].resource + (resources.empty() ? 1.0 : resources[a]);
      if (res > limit + kEps) continue;
      Label next;
      next.node = head;
      next.price = labels[id].price + prices[a];
      next.resource = res;
      next.visited = labels[id].visited;
      next.visited[head / 64] |= std::uint64_t{1} << (head % 64);
      next.pred = id;
      next.arc = a;
      push(std::move(next));
    }
  }

  // Negative prices let labels popped later reach the sink cheaper.
  std::stable_sort(at_sink.begin(), at_sink.end(), [&](int a, int b) {
    if (labels[a].price != labels[b].price) return labels[a].price < labels[b].price;
    return labels[a].resource < labels[b].resource;
  });
  std::vector<PricedPath> paths;
  std::set<std::vector<int>> seen;
  for (int id : at_sink) {
    if (static_cast<int>(paths.size()) >= max_paths) break;
    auto arcs = trace_arcs(labels, id);
    if (!seen.insert(arcs).second) continue;
    paths.push_back(PricedPath{std::move(arcs), labels[id].price, labels[id].resource});
  }
  return paths;
}

namespace {

// Bellman-Ford shortest path avoiding removed nodes/arcs; ties keep the
// first relaxation so the result is deterministic.
std::optional<PricedPath> shortest_path(const Digraph& g, std::span<const double> prices,
                                        int source, int sink,
                                        const std::vector<bool>& node_removed,
                                        const std::vector<bool>& arc_removed) {
  std::vector<double> dist(g.num_nodes, kInf);
  std::vector<int> pred(g.num_nodes, -1);
  dist[source] = 0.0;
  for (int round = 0; round < g.num_nodes; ++round) {
    bool changed = false;
    for (int a = 0; a < static_cast<int>(g.arcs.size()); ++a) {
      if (arc_removed[a]) continue;
      const auto& arc = g.arcs[a];
      if (node_removed[arc.tail] || node_removed[arc.head]) continue;
      if (dist[arc.tail] == kInf) continue;
      const double d = dist[arc.tail] + prices[a];
      if (d < dist[arc.head] - kEps) {
        dist[arc.head] = d;
        pred[arc.head] = a;
        changed = true;
      }
    }
    if (!changed) break;
  }
  if (dist[sink] == kInf) return std::nullopt;
  PricedPath p;
  p.price = dist[sink];
  std::vector<bool> on_path(g.num_nodes, false);
  for (int v = sink; v != source; v = g.arcs[pred[v]].tail) {
    if (on_path[v]) throw std::invalid_argument("k_shortest_paths: negative cycle");
    on_path[v] = true;
    p.arcs.push_back(pred[v]);
  }
  std::reverse(p.arcs.begin(), p.arcs.end());
  p.resource = static_cast<double>(p.arcs.size());
  return p;
}

double path_price(std::span<const double> prices, const std::vector<int>& arcs) {
  double s = 0.0;
  for (int a : arcs) s += prices[a];
  return s;
}

}  // namespace

std::vector<PricedPath> k_shortest_paths(const Digraph& graph,
                                         std::span<const double> prices,
                                         int source, int sink, int k,
                                         const std::vector<bool>& allowed) {
  if (k < 1) throw std::invalid_argument("k_shortest_paths: k must be at least 1");
  const int m = static_cast<int>(graph.arcs.size());
  std::vector<bool> base_removed(m, false);
  for (int a = 0; a < m; ++a) base_removed[a] = !arc_allowed(allowed, a);

  std::vector<PricedPath> found;
  auto first = shortest_path(graph, prices, source, sink,
                             std::vector<bool>(graph.num_nodes, false), base_removed);
  if (!first) return found;
  found.push_back(*first);

  // Candidates ordered by (price, hops, arc sequence) for determinism.
  auto less = [](const PricedPath& a, const PricedPath& b) {
    return std::tie(a.price, a.resource, a.arcs) < std::tie(b.price, b.resource, b.arcs);
  };
  std::set<PricedPath, decltype(less)> candidates(less);
  std::set<std::vector<int>> known{first->arcs};

  while (static_cast<int>(found.size()) < k) {
    const PricedPath& last = found.back();
    for (std::size_t i = 0; i < last.arcs.size(); ++i) {
      const std::vector<int> root(last.arcs.begin(), last.arcs.begin() + i);
      const int spur = i == 0 ? source : graph.arcs[last.arcs[i - 1]].head;
      std::vector<bool> arc_removed = base_removed;
      for (const auto& p : found) {
        if (p.arcs.size() > i && std::equal(root.begin(), root.end(), p.arcs.begin())) {
          arc_removed[p.arcs[i]] = true;
        }
      }
      std::vector<bool> node_removed(graph.num_nodes, false);
      node_removed[source] = i > 0;
      for (int a : root) node_removed[graph.arcs[a].tail] = true;
      node_removed[spur] = false;
      auto tail = shortest_path(graph, prices, spur, sink, node_removed, arc_removed);
      if (!tail) continue;
      std::vector<int> arcs = root;
      arcs.insert(arcs.end(), tail->arcs.begin(), tail->arcs.end());
      if (!known.insert(arcs).second) continue;
      PricedPath cand;
      cand.price = path_price(prices, arcs);
      cand.resource = static_cast<double>(arcs.size());
      cand.arcs = std::move(arcs);
      candidates.insert(std::move(cand));
    }
    if (candidates.empty()) break;
    found.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }
  return found;
}

}  // namespace cgbp
