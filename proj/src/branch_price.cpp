#include "cgbp/branch_price.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "cgbp/log.hpp"

namespace cgbp {

const char* to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::kOpen: return "Open";
    case NodeStatus::kPruned: return "Pruned";
    case NodeStatus::kFathomed: return "Fathomed";
    case NodeStatus::kBranched: return "Branched";
    case NodeStatus::kInfeasible: return "InfeasibleNode";
    case NodeStatus::kBeamPruned: return "BeamPruned";
  }
  return "?";
}

bool dominated(double bound, const BpState& state, double tol) {
  if (state.ub == kInf) return false;
  const double effective =
      state.integral_objective && std::isfinite(bound) ? std::ceil(bound - tol) : bound;
  return effective >= state.ub - tol;
}

std::vector<Column> filter_columns(const CompactModel& model, const std::vector<Column>& pool,
                                   const BoundSet& bounds) {
  std::vector<Column> kept;
  for (const auto& col : pool) {
    if (col.is_artificial) continue;
    if (bounds.admits(model, col)) kept.push_back(col);
  }
  return kept;
}

namespace {

void offer_incumbent(BpState& state, IntegerSolution sol, double tol) {
  if (sol.objective < state.ub - tol) {
    state.ub = sol.objective;
    state.incumbent = std::move(sol);
  }
}

}  // namespace

NodeOutcome process_node(const BpNode& node, const CompactModel& model,
                         const PricerSet& pricers, BpState& state, const BpConfig& config) {
  NodeOutcome out;
  RmpState rmp = init_rmp(model, filter_columns(model, node.pool, node.bounds), config.master,
                          node.bounds, node.branches);
  out.cg = run_cg(rmp, pricers, config.cg);
  for (const auto& col : rmp.pool) {
    if (!col.is_artificial) out.pool.push_back(col);
  }
  if (out.cg.termination == CgTermination::kBlockInfeasible) {
    out.status = NodeStatus::kInfeasible;
    out.bound = kInf;
    return out;
  }
  const bool converged = out.cg.termination == CgTermination::kConverged;
  out.certified = converged;
  if (converged && out.cg.artificial_active) {
    out.status = NodeStatus::kInfeasible;
    out.bound = kInf;
    return out;
  }
  out.bound = converged ? out.cg.objective : std::max(node.node_lb, out.cg.lagrangian_lb);
  if (!converged && out.cg.artificial_active) {
    out.status = NodeStatus::kPruned;
    return out;
  }
  if (dominated(out.bound, state, config.tol)) {
    out.status = NodeStatus::kPruned;
    return out;
  }
  if (auto sol = integer_solution(rmp, out.cg.weights)) {
    offer_incumbent(state, std::move(*sol), config.tol);
    out.status = NodeStatus::kFathomed;
    return out;
  }
  if (config.node_heuristic) {
    RoundingOutcome rounded = round_to_integer(rmp, out.cg);
    if (rounded.solution) {
      offer_incumbent(state, std::move(*rounded.solution), config.tol);
      if (dominated(out.bound, state, config.tol)) {
        out.status = NodeStatus::kPruned;
        return out;
      }
    }
  }
  out.candidate = select_fractional(rmp, out.cg.weights);
  if (!out.candidate) {
    throw std::runtime_error("node " + std::to_string(node.id) +
                             ": integral master weights do not give a feasible point");
  }
  out.status = NodeStatus::kBranched;
  return out;
}

std::pair<BpNode, BpNode> branch(const BpNode& node, const CompactModel& model,
                                 const BranchCandidate& candidate, int first_child_id) {
  auto make_child = [&](int id) {
    BpNode child;
    child.id = id;
    child.parent = node.id;
    child.depth = node.depth + 1;
    child.bounds = node.bounds.lower.empty() ? BoundSet::from_model(model) : node.bounds;
    child.branches = node.branches;
    child.node_lb = node.node_lb;
    child.pool = node.pool;
    return child;
  };
  BpNode down = make_child(first_child_id);
  BpNode up = make_child(first_child_id + 1);
  auto check = [](double value) {
    const double f = value - std::floor(value);
    if (f <= 1e-9 || f >= 1.0 - 1e-9) {
      throw std::invalid_argument("cannot branch on an integral value");
    }
  };
  if (const auto* v = std::get_if<OriginalVariableChoice>(&candidate)) {
    check(v->value);
    const Block& b = model.block(v->block);
    if (b.aggregated()) {
      const int local = v->var - b.first_var;
      down.branches.push_back(AggregateBranch{b.id, local, Relation::kLessEqual, std::floor(v->value)});
      up.branches.push_back(AggregateBranch{b.id, local, Relation::kGreaterEqual, std::ceil(v->value)});
    } else {
      down.bounds.upper[v->var] = std::floor(v->value);
      up.bounds.lower[v->var] = std::ceil(v->value);
    }
  } else {
    const auto& a = std::get<ArcFlowChoice>(candidate);
    check(a.value);
    down.branches.push_back(AggregateBranch{a.block, a.arc, Relation::kLessEqual, std::floor(a.value)});
    up.branches.push_back(AggregateBranch{a.block, a.arc, Relation::kGreaterEqual, std::ceil(a.value)});
  }
  return {std::move(down), std::move(up)};
}

std::size_t select_next(const std::vector<BpNode>& open, NodeStrategy strategy) {
  if (open.empty()) throw std::invalid_argument("select_next on an empty open set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < open.size(); ++i) {
    const BpNode& a = open[i];
    const BpNode& b = open[best];
    bool better = false;
    if (strategy == NodeStrategy::kBestFirst) {
      better = a.node_lb < b.node_lb || (a.node_lb == b.node_lb && a.id < b.id);
    } else {
      better = a.depth > b.depth || (a.depth == b.depth && a.id < b.id);
    }
    if (better) best = i;
  }
  return best;
}

std::pair<std::vector<BpNode>, std::vector<BpNode>> beam_select(std::vector<BpNode> nodes,
                                                                int beam_width) {
  std::stable_sort(nodes.begin(), nodes.end(), [](const BpNode& a, const BpNode& b) {
    return a.node_lb < b.node_lb || (a.node_lb == b.node_lb && a.id < b.id);
  });
  std::vector<BpNode> dropped;
  if (beam_width > 0 && static_cast<int>(nodes.size()) > beam_width) {
    for (auto it = nodes.begin() + beam_width; it != nodes.end(); ++it) {
      it->status = NodeStatus::kBeamPruned;
      dropped.push_back(std::move(*it));
    }
    nodes.resize(beam_width);
  }
  return {std::move(nodes), std::move(dropped)};
}

namespace {

using Clock = std::chrono::steady_clock;

class BpRun {
 public:
  BpRun(const CompactModel& model, const PricerSet& pricers, const BpConfig& config)
      : model_(model), pricers_(pricers), config_(config), start_(Clock::now()) {
    state_.integral_objective = model.has_integral_objective();
    bool nonnegative = true;
    for (double c : model.costs) nonnegative = nonnegative && c >= 0.0;
    state_.lb = nonnegative ? 0.0 : -kInf;
  }

  BpResult run(std::vector<Column> initial_columns) {
    BpNode root;
    root.id = next_id_++;
    root.bounds = BoundSet::from_model(model_);
    root.pool = filter_columns(model_, initial_columns, root.bounds);
    if (config_.beam_width > 0) {
      run_beam(std::move(root));
    } else {
      run_tree(std::move(root));
    }
    return finish();
  }

 private:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
  }

  bool out_of_budget() {
    if (result_.nodes >= config_.max_nodes ||
        (config_.time_limit_s > 0.0 && elapsed_ms() > 1000.0 * config_.time_limit_s)) {
      result_.limit_hit = true;
      return true;
    }
    return false;
  }

  BpConfig node_config() const {
    BpConfig c = config_;
    if (config_.time_limit_s > 0.0) {
      const double left = std::max(0.001, config_.time_limit_s - elapsed_ms() / 1000.0);
      c.cg.time_limit_s = c.cg.time_limit_s > 0.0 ? std::min(c.cg.time_limit_s, left) : left;
    }
    return c;
  }

  // Solves one node and returns its outcome; bookkeeping for statistics and
  // nodes dropped without proof.
  NodeOutcome solve(const BpNode& node) {
    NodeOutcome out = process_node(node, model_, pricers_, state_, node_config());
    ++result_.nodes;
    result_.node_log.push_back(NodeRecord{node.id, node.parent, node.depth, out.bound, out.status});
    result_.cg_iterations += out.cg.iterations;
    result_.columns_generated += out.cg.columns_generated;
    if (node.parent < 0) {
      result_.root_lp = out.cg.objective;
      result_.root_lagrangian = out.cg.lagrangian_lb;
    }
    if (!out.certified) {
      result_.uncertified_nodes = true;
      if (out.status == NodeStatus::kPruned || out.status == NodeStatus::kFathomed) {
        unproven_floor_ = std::min(unproven_floor_, std::max(node.node_lb, out.bound));
      }
    }
    logger()->debug("node {} depth {} -> {} bound {:.9g} ub {:.9g}", node.id, node.depth,
                    to_string(out.status), out.bound, state_.ub);
    return out;
  }

  void record(double open_min) {
    double candidate = std::min({open_min, unproven_floor_, state_.ub});
    if (state_.integral_objective && std::isfinite(candidate)) {
      candidate = std::min(state_.ub, std::ceil(candidate - config_.tol));
    }
    state_.lb = std::max(state_.lb, candidate);
    result_.history.push_back(BpHistoryEntry{result_.nodes, state_.ub, state_.lb, elapsed_ms()});
  }

  void push_children(const BpNode& node, const NodeOutcome& out, std::vector<BpNode>& into) {
    BpNode parent = node;
    parent.node_lb = out.bound;
    parent.pool = out.pool;
    auto [down, up] = branch(parent, model_, *out.candidate, next_id_);
    next_id_ += 2;
    into.push_back(std::move(down));
    into.push_back(std::move(up));
  }

  static double min_lb(const std::vector<BpNode>& nodes) {
    double m = kInf;
    for (const auto& n : nodes) m = std::min(m, n.node_lb);
    return m;
  }

  void run_tree(BpNode root) {
    std::vector<BpNode> open;
    open.push_back(std::move(root));
    while (!open.empty()) {
      if (out_of_budget()) {
        unproven_floor_ = std::min(unproven_floor_, min_lb(open));
        break;
      }
      const std::size_t idx = select_next(open, config_.strategy);
      BpNode node = std::move(open[idx]);
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(idx));
      if (dominated(node.node_lb, state_, config_.tol)) continue;
      const NodeOutcome out = solve(node);
      if (out.status == NodeStatus::kBranched) push_children(node, out, open);
      record(min_lb(open));
    }
    tree_exhausted_ = open.empty() && !result_.limit_hit;
  }

  void run_beam(BpNode root) {
    std::vector<BpNode> level;
    level.push_back(std::move(root));
    while (!level.empty()) {
      std::stable_sort(level.begin(), level.end(), [](const BpNode& a, const BpNode& b) {
        return a.node_lb < b.node_lb || (a.node_lb == b.node_lb && a.id < b.id);
      });
      std::vector<BpNode> branched;  // solved nodes carrying their own bound
      std::vector<NodeOutcome> outcomes;
      for (std::size_t i = 0; i < level.size(); ++i) {
        if (out_of_budget()) {
          for (std::size_t k = i; k < level.size(); ++k) {
            unproven_floor_ = std::min(unproven_floor_, level[k].node_lb);
          }
          unproven_floor_ = std::min(unproven_floor_, min_lb(branched));
          return;
        }
        BpNode& node = level[i];
        if (dominated(node.node_lb, state_, config_.tol)) continue;
        NodeOutcome out = solve(node);
        if (out.status == NodeStatus::kBranched) {
          BpNode solved = node;
          solved.node_lb = out.bound;
          branched.push_back(std::move(solved));
          outcomes.push_back(std::move(out));
        }
        double open_min = min_lb(branched);
        for (std::size_t k = i + 1; k < level.size(); ++k) {
          open_min = std::min(open_min, level[k].node_lb);
        }
        record(open_min);
      }
      // Keep the best branched nodes of this depth; only they get children.
      std::vector<std::size_t> order(branched.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const BpNode& x = branched[a];
        const BpNode& y = branched[b];
        return x.node_lb < y.node_lb || (x.node_lb == y.node_lb && x.id < y.id);
      });
      std::vector<BpNode> next;
      for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t k = order[r];
        if (static_cast<int>(r) < config_.beam_width) {
          BpNode parent = branched[k];
          parent.node_lb = outcomes[k].bound;
          push_children(parent, outcomes[k], next);
        } else {
          result_.beam_pruned = true;
          unproven_floor_ = std::min(unproven_floor_, branched[k].node_lb);
        }
      }
      level = std::move(next);
    }
    tree_exhausted_ = !result_.limit_hit;
  }

  BpResult finish() {
    result_.solution = state_.incumbent;
    result_.objective = state_.ub;
    const bool proven = tree_exhausted_ && !result_.beam_pruned && !result_.uncertified_nodes;
    if (proven) {
      result_.optimal = state_.incumbent.has_value();
      result_.infeasible = !state_.incumbent.has_value();
      if (state_.lb < state_.ub) {
        state_.lb = state_.ub;
        result_.history.push_back(
            BpHistoryEntry{result_.nodes, state_.ub, state_.lb, elapsed_ms()});
      }
    }
    result_.lower_bound = state_.lb;
    result_.wall_ms = elapsed_ms();
    return std::move(result_);
  }

  const CompactModel& model_;
  const PricerSet& pricers_;
  const BpConfig& config_;
  Clock::time_point start_;
  BpState state_;
  BpResult result_;
  int next_id_ = 0;
  // Smallest bound among subtrees abandoned without proof.
  double unproven_floor_ = kInf;
  bool tree_exhausted_ = false;
};

}  // namespace

BpResult run_bp(const CompactModel& model, std::vector<Column> initial_columns,
                const PricerSet& pricers, const BpConfig& config) {
  BpRun run(model, pricers, config);
  return run.run(std::move(initial_columns));
}

void write_history_csv(std::ostream& out, const std::vector<BpHistoryEntry>& history) {
  out << "node,ub,lb,wall_ms\n";
  for (const auto& h : history) {
    out << fmt::format("{},{:.12g},{:.12g},{:.3f}\n", h.node_index, h.ub, h.lb, h.wall_ms);
  }
}

}  // namespace cgbp
