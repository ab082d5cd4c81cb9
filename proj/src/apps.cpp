#include "cgbp/apps.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>

#include "cgbp/paths.hpp"

namespace cgbp {

using nlohmann::json;

void check_instance(const CuttingStockInstance& inst) {
  if (inst.roll_width <= 0) throw InstanceError("/roll_width", "must be a positive integer");
  if (inst.items.empty()) throw InstanceError("/items", "needs at least one item");
  for (std::size_t i = 0; i < inst.items.size(); ++i) {
    const auto& it = inst.items[i];
    const std::string at = "/items/" + std::to_string(i);
    if (it.size <= 0) throw InstanceError(at + "/size", "must be a positive integer");
    if (it.size > inst.roll_width) throw InstanceError(at + "/size", "exceeds the roll width");
    if (it.demand < 1) throw InstanceError(at + "/demand", "must be at least 1");
  }
}

void check_instance(const NetPathInstance& inst) {
  if (inst.nodes <= 0) throw InstanceError("/nodes", "must be a positive integer");
  for (std::size_t a = 0; a < inst.arcs.size(); ++a) {
    const auto& arc = inst.arcs[a];
    const std::string at = "/arcs/" + std::to_string(a);
    if (arc.from < 0 || arc.from >= inst.nodes) throw InstanceError(at + "/from", "unknown node");
    if (arc.to < 0 || arc.to >= inst.nodes) throw InstanceError(at + "/to", "unknown node");
    if (arc.from == arc.to) throw InstanceError(at, "self loops are not allowed");
    if (!std::isfinite(arc.cost) || arc.cost < 0.0) {
      throw InstanceError(at + "/cost", "must be finite and nonnegative");
    }
    if (arc.capacity <= 0) throw InstanceError(at + "/capacity", "must be positive");
  }
  if (inst.tasks.empty()) throw InstanceError("/tasks", "needs at least one task");
  for (std::size_t k = 0; k < inst.tasks.size(); ++k) {
    const auto& t = inst.tasks[k];
    const std::string at = "/tasks/" + std::to_string(k);
    if (t.src < 0 || t.src >= inst.nodes) throw InstanceError(at + "/src", "unknown node");
    if (t.dst < 0 || t.dst >= inst.nodes) throw InstanceError(at + "/dst", "unknown node");
    if (t.src == t.dst) throw InstanceError(at, "source and sink must differ");
    if (t.demand < 1) throw InstanceError(at + "/demand", "must be at least 1");
    if (t.max_hops != -1 && t.max_hops < 1) throw InstanceError(at + "/max_hops", "must be at least 1");
  }
}

void check_instance(const Instance& instance) {
  std::visit([](const auto& inst) { check_instance(inst); }, instance);
}

CompactModel build_cutting_stock(const CuttingStockInstance& inst) {
  check_instance(inst);
  CompactModel m;
  m.name = "cutting_stock";
  const int n = static_cast<int>(inst.items.size());
  int copies = 0;
  for (const auto& it : inst.items) copies += it.demand;
  const int b = m.add_block(StructureTag::kKnapsack, copies);
  KnapsackStructure ks;
  ks.capacity = inst.roll_width;
  Row capacity{"capacity", {}, Relation::kLessEqual, 0.0};
  for (int i = 0; i < n; ++i) {
    const auto& it = inst.items[i];
    const int hi = std::min(it.demand, inst.roll_width / it.size);
    const int v = m.add_variable(b, "a" + std::to_string(i), 0.0, true, 0.0, hi);
    ks.item_vars.push_back(v - m.blocks[b].first_var);
    ks.sizes.push_back(it.size);
    capacity.terms.push_back(Term{v, static_cast<double>(it.size)});
  }
  const int y = m.add_variable(b, "y", 1.0, true, 0.0, 1.0);
  ks.roll_var = y - m.blocks[b].first_var;
  capacity.terms.push_back(Term{y, -static_cast<double>(inst.roll_width)});
  m.add_block_row(b, std::move(capacity));
  m.blocks[b].structure = ks;
  for (int i = 0; i < n; ++i) {
    m.add_linking_row(Row{"demand" + std::to_string(i),
                          {Term{m.blocks[b].first_var + ks.item_vars[i], 1.0}},
                          Relation::kGreaterEqual,
                          static_cast<double>(inst.items[i].demand)});
  }
  return m;
}

CompactModel build_net_path(const NetPathInstance& inst) {
  check_instance(inst);
  CompactModel m;
  m.name = "net_path";
  const int arcs = static_cast<int>(inst.arcs.size());
  std::vector<PathArc> path_arcs;
  for (const auto& a : inst.arcs) path_arcs.push_back(PathArc{a.from, a.to});
  for (std::size_t k = 0; k < inst.tasks.size(); ++k) {
    const auto& task = inst.tasks[k];
    const int b = m.add_block(StructureTag::kPath, 0);
    PathStructure ps;
    ps.num_nodes = inst.nodes;
    ps.arcs = path_arcs;
    ps.source = task.src;
    ps.sink = task.dst;
    ps.max_hops = task.max_hops;
    for (int a = 0; a < arcs; ++a) {
      const int v = m.add_variable(b, "u" + std::to_string(k) + "_" + std::to_string(a),
                                   task.demand * inst.arcs[a].cost, true, 0.0, 1.0);
      ps.arc_vars.push_back(v - m.blocks[b].first_var);
    }
    const int first = m.blocks[b].first_var;
    for (int v = 0; v < inst.nodes; ++v) {
      Row row{"flow" + std::to_string(k) + "_" + std::to_string(v), {}, Relation::kEqual, 0.0};
      for (int a = 0; a < arcs; ++a) {
        if (inst.arcs[a].from == v) row.terms.push_back(Term{first + a, 1.0});
        if (inst.arcs[a].to == v) row.terms.push_back(Term{first + a, -1.0});
      }
      row.rhs = v == task.src ? 1.0 : v == task.dst ? -1.0 : 0.0;
      // Rows of isolated nodes are vacuous, except at the endpoints where
      // they record that the task cannot be routed.
      if (row.terms.empty() && row.rhs == 0.0) continue;
      m.add_block_row(b, std::move(row));
    }
    if (task.max_hops >= 0) {
      Row hops{"hops" + std::to_string(k), {}, Relation::kLessEqual,
               static_cast<double>(task.max_hops)};
      for (int a = 0; a < arcs; ++a) hops.terms.push_back(Term{first + a, 1.0});
      m.add_block_row(b, std::move(hops));
    }
    m.blocks[b].structure = ps;
  }
  for (int a = 0; a < arcs; ++a) {
    Row cap{"cap" + std::to_string(a), {}, Relation::kLessEqual,
            static_cast<double>(inst.arcs[a].capacity)};
    for (int k = 0; k < static_cast<int>(inst.tasks.size()); ++k) {
      cap.terms.push_back(
          Term{m.blocks[k].first_var + a, static_cast<double>(inst.tasks[k].demand)});
    }
    m.add_linking_row(std::move(cap));
  }
  return m;
}

CompactModel build_model(const Instance& instance) {
  return std::visit(
      [](const auto& inst) -> CompactModel {
        using T = std::decay_t<decltype(inst)>;
        if constexpr (std::is_same_v<T, CuttingStockInstance>) {
          return build_cutting_stock(inst);
        } else {
          return build_net_path(inst);
        }
      },
      instance);
}

std::vector<Column> warm_start(const CompactModel& model, const Instance& instance,
                               int k_paths) {
  std::vector<Column> cols;
  if (const auto* cs = std::get_if<CuttingStockInstance>(&instance)) {
    const Block& b = model.blocks.at(0);
    const auto& ks = std::get<KnapsackStructure>(b.structure);
    for (std::size_t i = 0; i < cs->items.size(); ++i) {
      std::vector<double> values(b.num_vars, 0.0);
      values[ks.item_vars[i]] = 1.0;
      values[ks.roll_var] = 1.0;
      cols.push_back(make_column(model, b.id, std::move(values)));
    }
    return cols;
  }
  const auto& np = std::get<NetPathInstance>(instance);
  std::vector<PathArc> arcs;
  std::vector<double> costs;
  for (const auto& a : np.arcs) {
    arcs.push_back(PathArc{a.from, a.to});
    costs.push_back(a.cost);
  }
  const Digraph graph(np.nodes, arcs);
  for (std::size_t k = 0; k < np.tasks.size(); ++k) {
    const auto& task = np.tasks[k];
    const Block& b = model.blocks.at(k);
    for (const auto& p : k_shortest_paths(graph, costs, task.src, task.dst, k_paths)) {
      if (task.max_hops >= 0 && static_cast<int>(p.arcs.size()) > task.max_hops) continue;
      std::vector<double> values(b.num_vars, 0.0);
      for (int a : p.arcs) values[a] = 1.0;
      cols.push_back(make_column(model, b.id, std::move(values)));
    }
  }
  return cols;
}

namespace {

json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json cutting_stock_solution(const CompactModel& model, const CuttingStockInstance& inst,
                            const IntegerSolution& sol) {
  const Block& b = model.blocks[0];
  const auto& ks = std::get<KnapsackStructure>(b.structure);
  const int n = static_cast<int>(inst.items.size());
  json patterns = json::array();
  std::vector<long> produced(n, 0);
  long rolls = 0;
  for (const auto& p : sol.blocks[0]) {
    if (p.count <= 0) continue;
    std::vector<int> counts(n);
    int load = 0;
    for (int i = 0; i < n; ++i) {
      counts[i] = static_cast<int>(std::lround(p.values[ks.item_vars[i]]));
      produced[i] += static_cast<long>(counts[i]) * p.count;
      load += counts[i] * inst.items[i].size;
    }
    if (p.values[ks.roll_var] > 0.5) rolls += p.count;
    patterns.push_back({{"counts", counts}, {"copies", p.count}, {"load", load}});
  }
  bool covered = true;
  std::vector<int> demand;
  for (int i = 0; i < n; ++i) {
    demand.push_back(inst.items[i].demand);
    covered = covered && produced[i] >= inst.items[i].demand;
  }
  return {{"rolls", rolls},
          {"patterns", patterns},
          {"demand", demand},
          {"produced", produced},
          {"demand_covered", covered}};
}

json net_path_solution(const NetPathInstance& inst, const IntegerSolution& sol) {
  json paths = json::array();
  const int arcs = static_cast<int>(inst.arcs.size());
  std::vector<long> load(arcs, 0);
  for (std::size_t k = 0; k < inst.tasks.size(); ++k) {
    const auto& task = inst.tasks[k];
    const auto& values = sol.blocks[k].front().values;
    std::vector<int> used;
    double cost = 0.0;
    for (int a = 0; a < arcs; ++a) {
      if (values[a] > 0.5) {
        used.push_back(a);
        load[a] += task.demand;
        cost += task.demand * inst.arcs[a].cost;
      }
    }
    // Walk from the source to list nodes in order.
    std::vector<int> nodes{task.src};
    std::vector<bool> taken(arcs, false);
    for (int cur = task.src, guard = 0; cur != task.dst && guard < arcs; ++guard) {
      bool moved = false;
      for (int a : used) {
        if (!taken[a] && inst.arcs[a].from == cur) {
          taken[a] = true;
          cur = inst.arcs[a].to;
          nodes.push_back(cur);
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    paths.push_back({{"task", k}, {"arcs", used}, {"nodes", nodes}, {"cost", cost}});
  }
  json loads = json::array();
  bool within = true;
  for (int a = 0; a < arcs; ++a) {
    if (load[a] == 0) continue;
    within = within && load[a] <= inst.arcs[a].capacity;
    loads.push_back({{"arc", a},
                     {"from", inst.arcs[a].from},
                     {"to", inst.arcs[a].to},
                     {"load", load[a]},
                     {"capacity", inst.arcs[a].capacity}});
  }
  return {{"paths", paths}, {"arc_loads", loads}, {"loads_within_capacity", within}};
}

}  // namespace

json solution_report(const CompactModel& model, const Instance& instance,
                     const SolveSummary& summary) {
  json report;
  report["status"] = summary.status;
  report["algorithm"] = summary.algorithm;
  report["termination"] = summary.termination;
  report["objective"] = summary.solution ? json(summary.solution->objective) : json(nullptr);
  report["bounds"] = {{"lb", number_or_null(summary.lb)}, {"ub", number_or_null(summary.ub)}};
  report["lp_value"] = number_or_null(summary.lp_value);
  report["iterations"] = summary.iterations;
  report["nodes"] = summary.nodes;
  report["columns"] = summary.columns;
  report["wall_ms"] = summary.wall_ms;
  bool verified = false;
  json solution = nullptr;
  if (summary.solution) {
    const auto problems = verify_solution(model, *summary.solution);
    verified = problems.empty();
    if (verified) {
      if (const auto* cs = std::get_if<CuttingStockInstance>(&instance)) {
        solution = cutting_stock_solution(model, *cs, *summary.solution);
      } else {
        solution = net_path_solution(std::get<NetPathInstance>(instance), *summary.solution);
      }
    } else {
      report["verification_errors"] = problems;
    }
  }
  report["verified"] = verified;
  report["solution"] = solution;
  return report;
}

std::string report_text(const json& report) {
  std::ostringstream out;
  auto num = [](const json& v) {
    if (v.is_null()) return std::string("-");
    std::ostringstream s;
    s << v.get<double>();
    return s.str();
  };
  out << "status: " << report.at("status").get<std::string>() << " ("
      << report.at("termination").get<std::string>() << ")\n";
  out << "objective: " << num(report.at("objective")) << "  lb: "
      << num(report.at("bounds").at("lb")) << "  ub: " << num(report.at("bounds").at("ub"))
      << "\n";
  out << "iterations: " << report.at("iterations") << "  nodes: " << report.at("nodes")
      << "  wall_ms: " << report.at("wall_ms") << "\n";
  const json& sol = report.at("solution");
  if (sol.is_object() && sol.contains("rolls")) {
    out << "rolls: " << sol.at("rolls") << "\n";
    for (const auto& p : sol.at("patterns")) {
      out << "  " << p.at("copies") << " x " << p.at("counts").dump() << "\n";
    }
  } else if (sol.is_object() && sol.contains("paths")) {
    for (const auto& p : sol.at("paths")) {
      out << "  task " << p.at("task") << ": " << p.at("nodes").dump() << " cost "
          << p.at("cost") << "\n";
    }
  }
  out << "verified: " << (report.at("verified").get<bool>() ? "yes" : "no") << "\n";
  return out.str();
}

CuttingStockInstance generate_cutting_stock(std::uint64_t seed, const CuttingStockGenParams& p) {
  if (p.items < 1 || p.width < 1 || p.min_size < 1 || p.max_size < p.min_size ||
      p.max_demand < 1) {
    throw std::invalid_argument("cutting stock generator: sizes must be positive");
  }
  if (p.min_size > p.width) {
    throw std::invalid_argument("cutting stock generator: min_size exceeds the roll width");
  }
  std::mt19937_64 rng(seed);
  const int max_size = std::min(p.max_size, p.width);
  std::uniform_int_distribution<int> size(p.min_size, max_size);
  std::uniform_int_distribution<int> demand(1, p.max_demand);
  CuttingStockInstance inst;
  inst.roll_width = p.width;
  for (int i = 0; i < p.items; ++i) {
    const int s = size(rng);
    const int d = demand(rng);
    inst.items.push_back(CuttingStockItem{s, d});
  }
  return inst;
}

namespace {

// Some path from src to dst using only arcs that can carry `demand`.
bool routable(const NetPathInstance& inst, const NetTask& task) {
  std::vector<int> hops(inst.nodes, -1);
  std::deque<int> queue{task.src};
  hops[task.src] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (const auto& a : inst.arcs) {
      if (a.from != v || a.capacity < task.demand || hops[a.to] >= 0) continue;
      hops[a.to] = hops[v] + 1;
      queue.push_back(a.to);
    }
  }
  return hops[task.dst] >= 0 && (task.max_hops < 0 || hops[task.dst] <= task.max_hops);
}

}  // namespace

NetPathInstance generate_net_path(std::uint64_t seed, const NetPathGenParams& p) {
  if (p.nodes < 2 || p.tasks < 1 || p.min_capacity < 1 || p.max_capacity < p.min_capacity ||
      p.max_demand < 1 || p.max_cost < 0 || p.arc_probability <= 0.0 || p.arc_probability > 1.0) {
    throw std::invalid_argument("net path generator: unsatisfiable size parameters");
  }
  if (p.max_demand > p.max_capacity) {
    throw std::invalid_argument("net path generator: demands cannot exceed every capacity");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> cost(1, std::max(1, p.max_cost));
  std::uniform_int_distribution<int> cap(p.min_capacity, p.max_capacity);
  std::uniform_int_distribution<int> node(0, p.nodes - 1);
  std::uniform_int_distribution<int> demand(1, p.max_demand);
  for (int attempt = 0; attempt < std::max(1, p.max_retries); ++attempt) {
    NetPathInstance inst;
    inst.nodes = p.nodes;
    for (int u = 0; u < p.nodes; ++u) {
      for (int v = 0; v < p.nodes; ++v) {
        if (u == v || coin(rng) >= p.arc_probability) continue;
        inst.arcs.push_back(NetArc{u, v, static_cast<double>(cost(rng)), cap(rng)});
      }
    }
    for (int k = 0; k < p.tasks; ++k) {
      NetTask t;
      t.src = node(rng);
      do {
        t.dst = node(rng);
      } while (t.dst == t.src);
      t.demand = demand(rng);
      t.max_hops = p.max_hops;
      inst.tasks.push_back(t);
    }
    bool ok = true;
    for (const auto& t : inst.tasks) ok = ok && routable(inst, t);
    if (ok) return inst;
  }
  throw std::runtime_error("net path generator: no routable instance within the retry budget");
}

}  // namespace cgbp
