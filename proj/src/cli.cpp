#include "cgbp/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "cgbp/branch_price.hpp"
#include "cgbp/colgen.hpp"
#include "cgbp/instance_io.hpp"
#include "cgbp/oracle.hpp"

namespace cgbp {

using nlohmann::json;

namespace {

SolveSummary solve_cg(const CompactModel& model, const Instance& instance,
                      const SolveOptions& opt, int& code, std::string* trace_csv) {
  CgConfig cfg;
  cfg.max_iterations = opt.max_iters;
  cfg.rc_tolerance = opt.rc_tol;
  cfg.time_limit_s = opt.time_limit;
  RmpState rmp = init_rmp(model, warm_start(model, instance));
  const PricerSet pricers;
  const CgResult cg = run_cg(rmp, pricers, cfg);
  if (trace_csv != nullptr) {
    std::ostringstream csv;
    write_trace_csv(csv, cg.trace);
    *trace_csv = csv.str();
  }
  SolveSummary s;
  s.algorithm = "cg";
  s.termination = to_string(cg.termination);
  s.iterations = cg.iterations;
  s.columns = cg.columns_generated;
  s.lp_value = cg.objective;
  s.lb = cg.lagrangian_lb;
  s.wall_ms = cg.wall_ms;
  const bool converged = cg.termination == CgTermination::kConverged;
  if (cg.termination == CgTermination::kBlockInfeasible || (converged && cg.artificial_active)) {
    s.status = "infeasible";
    code = kExitInfeasible;
    return s;
  }
  RoundingOutcome rounded = round_to_integer(rmp, cg);
  if (rounded.solution) {
    s.ub = rounded.solution->objective;
    s.solution = std::move(rounded.solution);
  } else {
    s.termination += "; rounding failed: " + rounded.failure;
  }
  if (converged) {
    s.status = s.solution ? "feasible" : "no_solution";
    code = kExitSolved;
  } else {
    s.status = "limit";
    code = kExitLimit;
  }
  return s;
}

SolveSummary solve_bp(const CompactModel& model, const Instance& instance,
                      const SolveOptions& opt, int& code, std::string* trace_csv) {
  BpConfig cfg;
  cfg.cg.max_iterations = opt.max_iters;
  cfg.cg.rc_tolerance = opt.rc_tol;
  cfg.beam_width = opt.beam_width;
  cfg.time_limit_s = opt.time_limit;
  if (opt.node_strategy == "dfs") {
    cfg.strategy = NodeStrategy::kDfs;
  } else if (opt.node_strategy == "best_first") {
    cfg.strategy = NodeStrategy::kBestFirst;
  } else {
    throw InputError("unknown node strategy '" + opt.node_strategy + "'", 0, 0, "--node-strategy");
  }
  const PricerSet pricers;
  BpResult bp = run_bp(model, warm_start(model, instance), pricers, cfg);
  if (trace_csv != nullptr) {
    std::ostringstream csv;
    write_history_csv(csv, bp.history);
    *trace_csv = csv.str();
  }
  SolveSummary s;
  s.algorithm = "bp";
  s.iterations = bp.cg_iterations;
  s.nodes = bp.nodes;
  s.columns = bp.columns_generated;
  s.lp_value = bp.root_lp;
  s.lb = bp.lower_bound;
  s.ub = bp.objective;
  s.wall_ms = bp.wall_ms;
  s.solution = bp.solution;
  if (bp.optimal) {
    s.status = "optimal";
    s.termination = "tree exhausted";
    code = kExitSolved;
  } else if (bp.infeasible) {
    s.status = "infeasible";
    s.termination = "tree exhausted";
    code = kExitInfeasible;
  } else if (bp.limit_hit || bp.uncertified_nodes) {
    s.status = "limit";
    s.termination = bp.limit_hit ? "node or time limit" : "column generation capped at some node";
    code = kExitLimit;
  } else {
    s.status = s.solution ? "feasible" : "no_solution";
    s.termination = "beam search";
    code = s.solution ? kExitSolved : kExitLimit;
  }
  return s;
}

SolveSummary solve_oracle(const CompactModel& model, int& code) {
  const auto start = std::chrono::steady_clock::now();
  SolveSummary s;
  s.algorithm = "oracle";
  try {
    oracle::MipResult mip = oracle::brute_force_mip(model);
    s.nodes = static_cast<int>(mip.candidates);
    if (mip.feasible) {
      s.status = "optimal";
      s.termination = "exhaustive";
      s.lb = s.ub = mip.objective;
      s.solution = std::move(mip.solution);
      code = kExitSolved;
    } else {
      s.status = "infeasible";
      s.termination = "exhaustive";
      code = kExitInfeasible;
    }
  } catch (const oracle::LimitExceeded& e) {
    s.status = "limit";
    s.termination = e.what();
    code = kExitLimit;
  }
  s.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                  .count();
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path, 0, 0, "");
  out << text;
}

}  // namespace

std::pair<json, int> solve_instance(const Instance& instance, const SolveOptions& options,
                                    std::string* trace_csv) {
  const CompactModel model = build_model(instance);
  int code = kExitSolved;
  SolveSummary summary;
  if (options.algorithm == "cg") {
    summary = solve_cg(model, instance, options, code, trace_csv);
  } else if (options.algorithm == "bp") {
    summary = solve_bp(model, instance, options, code, trace_csv);
  } else if (options.algorithm == "oracle") {
    summary = solve_oracle(model, code);
  } else {
    throw InputError("unknown algorithm '" + options.algorithm + "'", 0, 0, "--algorithm");
  }
  json report = solution_report(model, instance, summary);
  report["seed"] = options.seed;
  return {std::move(report), code};
}

int cmd_solve(const SolveOptions& options) {
  try {
    const Instance instance = load_instance(options.instance);
    std::string trace;
    auto [report, code] =
        solve_instance(instance, options, options.trace.empty() ? nullptr : &trace);
    const std::string text = report.dump(2) + "\n";
    if (options.out.empty()) {
      std::cout << text;
    } else {
      write_text(options.out, text);
      std::cerr << report_text(report);
    }
    if (!options.trace.empty()) write_text(options.trace, trace);
    return code;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  }
}

int cmd_gen(const GenOptions& options) {
  try {
    Instance inst;
    if (options.kind == "cutting_stock") {
      inst = generate_cutting_stock(options.seed, options.cutting_stock);
    } else if (options.kind == "net_path") {
      inst = generate_net_path(options.seed, options.net_path);
    } else {
      std::cerr << "input error: unknown kind '" << options.kind << "'\n";
      return kExitInputError;
    }
    const std::string text = dump_instance(inst);
    if (options.out.empty()) {
      std::cout << text;
    } else {
      write_text(options.out, text);
    }
    return kExitSolved;
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Column generation and branch-and-price for block-angular programs"};
  app.require_subcommand(1);

  SolveOptions solve;
  std::string beam = "unlimited";
  auto* s = app.add_subcommand("solve", "Solve an instance file");
  s->add_option("--instance", solve.instance, "Instance JSON")->required();
  s->add_option("--algorithm", solve.algorithm, "cg | bp | oracle")
      ->check(CLI::IsMember({"cg", "bp", "oracle"}));
  s->add_option("--beam-width", beam, "N or unlimited");
  s->add_option("--max-iters", solve.max_iters, "CG iteration cap per node")
      ->check(CLI::PositiveNumber);
  s->add_option("--rc-tol", solve.rc_tol, "Reduced-cost tolerance")->check(CLI::PositiveNumber);
  s->add_option("--node-strategy", solve.node_strategy, "best_first | dfs")
      ->check(CLI::IsMember({"best_first", "dfs"}));
  s->add_option("--time-limit", solve.time_limit, "Seconds, 0 for none")
      ->check(CLI::NonNegativeNumber);
  s->add_option("--seed", solve.seed, "Recorded in the report");
  s->add_option("--out", solve.out, "Report JSON path");
  s->add_option("--trace", solve.trace, "CSV trace path");

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a seeded instance");
  g->add_option("--kind", gen.kind, "cutting_stock | net_path")
      ->required()
      ->check(CLI::IsMember({"cutting_stock", "net_path"}));
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--out", gen.out, "Output path");
  g->add_option("--items", gen.cutting_stock.items, "Item types");
  g->add_option("--min-size", gen.cutting_stock.min_size, "Smallest item size");
  g->add_option("--max-size", gen.cutting_stock.max_size, "Largest item size");
  g->add_option("--width", gen.cutting_stock.width, "Roll width");
  g->add_option("--max-demand", gen.cutting_stock.max_demand, "Largest demand");
  g->add_option("--nodes", gen.net_path.nodes, "Nodes");
  g->add_option("--tasks", gen.net_path.tasks, "Tasks");
  g->add_option("--arc-prob", gen.net_path.arc_probability, "Arc probability");
  g->add_option("--max-cost", gen.net_path.max_cost, "Largest arc cost");
  g->add_option("--min-cap", gen.net_path.min_capacity, "Smallest arc capacity");
  g->add_option("--max-cap", gen.net_path.max_capacity, "Largest arc capacity");
  g->add_option("--task-demand", gen.net_path.max_demand, "Largest task demand");
  g->add_option("--max-hops", gen.net_path.max_hops, "Hop limit per task, -1 for none");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInputError;
  }
  if (*s) {
    if (beam == "unlimited") {
      solve.beam_width = 0;
    } else {
      try {
        std::size_t used = 0;
        solve.beam_width = std::stoi(beam, &used);
        if (used != beam.size() || solve.beam_width < 1) throw std::invalid_argument(beam);
      } catch (const std::exception&) {
        std::cerr << "input error: --beam-width must be a positive integer or 'unlimited'\n";
        return kExitInputError;
      }
    }
    return cmd_solve(solve);
  }
  return cmd_gen(gen);
}

}  // namespace cgbp
