#include <random>
#include <set>

#include "doctest.h"

#include "cgbp/apps.hpp"
#include "cgbp/branch_price.hpp"
#include "cgbp/colgen.hpp"
#include "cgbp/instance_io.hpp"
#include "support.hpp"

using namespace cgbp;

namespace {

BpResult solve(const Instance& inst) {
  const CompactModel m = build_model(inst);
  return run_bp(m, warm_start(m, inst), PricerSet{});
}

SolveSummary summary_of(const BpResult& r) {
  SolveSummary s;
  s.algorithm = "bp";
  s.status = r.optimal ? "optimal" : r.infeasible ? "infeasible" : "limit";
  s.termination = "done";
  s.lb = r.lower_bound;
  s.ub = r.objective;
  s.nodes = r.nodes;
  s.solution = r.solution;
  return s;
}

}  // namespace

TEST_CASE("cutting stock model shape") {
  const auto inst = std::get<CuttingStockInstance>(load_instance(support::data_path("cs1.json")));
  const CompactModel m = build_cutting_stock(inst);
  REQUIRE(m.num_blocks() == 1);
  CHECK(m.blocks[0].multiplicity == 6);
  CHECK(m.blocks[0].num_vars == 3);
  CHECK(m.linking_rows.size() == 2);
  CHECK(m.block_rows[0].size() == 1);
  // a_0 <= min(4, 10 / 3) = 3, a_1 <= min(2, 10 / 5) = 2, y binary.
  CHECK(m.variables[0].upper == 3.0);
  CHECK(m.variables[1].upper == 2.0);
  CHECK(m.variables[2].upper == 1.0);
  CHECK(m.costs[2] == 1.0);
  CHECK(m.has_integral_objective());
}

TEST_CASE("net path model shape") {
  const auto inst = std::get<NetPathInstance>(load_instance(support::data_path("np1.json")));
  const CompactModel m = build_net_path(inst);
  CHECK(m.num_blocks() == 2);
  CHECK(m.linking_rows.size() == inst.arcs.size());
  for (int k = 0; k < 2; ++k) {
    CHECK(m.blocks[k].num_vars == static_cast<int>(inst.arcs.size()));
    CHECK(m.blocks[k].multiplicity == 0);
  }
  // Arc 3 costs 2 for a demand-1 task.
  CHECK(m.costs[3] == 2.0);
  NetPathInstance hops = inst;
  hops.tasks[0].max_hops = 2;
  const CompactModel h = build_net_path(hops);
  CHECK(h.block_rows[0].size() == m.block_rows[0].size() + 1);
  CHECK(h.block_rows[1].size() == m.block_rows[1].size());
}

TEST_CASE("closed-form cutting stock optima") {
  SUBCASE("one item as wide as the roll needs one roll per piece") {
    const BpResult r = solve(Instance(CuttingStockInstance{7, {{7, 5}}}));
    CHECK(r.optimal);
    CHECK(r.objective == doctest::Approx(5.0));
  }
  SUBCASE("pieces wider than half a roll never share") {
    const BpResult r = solve(Instance(CuttingStockInstance{20, {{11, 2}, {13, 3}, {17, 1}}}));
    CHECK(r.optimal);
    CHECK(r.objective == doctest::Approx(6.0));
  }
}

TEST_CASE("warm starts") {
  const Instance cs = load_instance(support::data_path("cs1.json"));
  const CompactModel m = build_model(cs);
  const auto cols = warm_start(m, cs);
  REQUIRE(cols.size() == 2);
  const RmpState rmp = init_rmp(m, cols);
  // Each item alone on a roll: 4 + 2 rolls.
  CHECK(solve_lrmp(rmp).objective == doctest::Approx(6.0));

  const Instance np = load_instance(support::data_path("np1.json"));
  const CompactModel n = build_model(np);
  const auto paths = warm_start(n, np);
  std::vector<int> per_task(2, 0);
  for (const auto& c : paths) ++per_task[c.block_id];
  CHECK(per_task[0] >= 1);
  CHECK(per_task[0] <= 3);
  CHECK(per_task[1] >= 1);
  CHECK(per_task[1] <= 3);
  const auto one = warm_start(n, np, 1);
  CHECK(one.size() == 2);
}

TEST_CASE("a disconnected sink is infeasible") {
  const NetPathInstance inst{4, {{0, 1, 1.0, 1}, {2, 3, 1.0, 1}}, {{0, 3, 1, -1}}};
  const BpResult r = solve(Instance(inst));
  CHECK(r.infeasible);
  const CompactModel m = build_model(Instance(inst));
  SolveSummary s = summary_of(r);
  const auto report = solution_report(m, Instance(inst), s);
  CHECK(report["status"] == "infeasible");
  CHECK(report["objective"].is_null());
  CHECK(report["verified"] == false);
}

TEST_CASE("report for CS-1") {
  const Instance inst = load_instance(support::data_path("cs1.json"));
  const CompactModel m = build_model(inst);
  const auto report = solution_report(m, inst, summary_of(solve(inst)));
  CHECK(report["status"] == "optimal");
  CHECK(report["verified"] == true);
  CHECK(report["objective"].get<double>() == doctest::Approx(3.0));
  CHECK(report["solution"]["rolls"] == 3);
  CHECK(report["solution"]["demand_covered"] == true);
  for (const char* key : {"bounds", "iterations", "nodes", "wall_ms", "termination"}) {
    CHECK(report.contains(key));
  }
  const std::string text = report_text(report);
  CHECK(text.find("rolls: 3") != std::string::npos);
  CHECK(text.find("verified: yes") != std::string::npos);
}

TEST_CASE("report for NP-1 lists paths within capacity") {
  const Instance inst = load_instance(support::data_path("np1.json"));
  const CompactModel m = build_model(inst);
  const auto report = solution_report(m, inst, summary_of(solve(inst)));
  CHECK(report["verified"] == true);
  CHECK(report["solution"]["paths"].size() == 2);
  CHECK(report["solution"]["loads_within_capacity"] == true);
  for (const auto& p : report["solution"]["paths"]) {
    const auto& np = std::get<NetPathInstance>(inst);
    const int k = p["task"];
    CHECK(p["nodes"].front() == np.tasks[k].src);
    CHECK(p["nodes"].back() == np.tasks[k].dst);
  }
}

TEST_CASE("an unverifiable solution is reported as such") {
  const Instance inst = load_instance(support::data_path("cs1.json"));
  const CompactModel m = build_model(inst);
  SolveSummary s;
  s.status = "feasible";
  IntegerSolution bad;
  bad.blocks = {{BlockPoint{{1, 0, 1}, 1}}};
  bad.objective = 1.0;
  s.solution = bad;
  const auto report = solution_report(m, inst, s);
  CHECK(report["verified"] == false);
  CHECK(report["solution"].is_null());
  CHECK_FALSE(report["verification_errors"].empty());
}

TEST_CASE("invalid instances are rejected with the offending field") {
  auto field_of = [](const Instance& inst) {
    try {
      check_instance(inst);
    } catch (const InstanceError& e) {
      return e.field();
    }
    return std::string();
  };
  CHECK(field_of(CuttingStockInstance{0, {{1, 1}}}) == "/roll_width");
  CHECK(field_of(CuttingStockInstance{10, {}}) == "/items");
  CHECK(field_of(CuttingStockInstance{10, {{11, 1}}}) == "/items/0/size");
  CHECK(field_of(CuttingStockInstance{10, {{3, 1}, {3, 0}}}) == "/items/1/demand");
  CHECK(field_of(NetPathInstance{2, {{0, 5, 1.0, 1}}, {{0, 1, 1, -1}}}) == "/arcs/0/to");
  CHECK(field_of(NetPathInstance{2, {{0, 1, -1.0, 1}}, {{0, 1, 1, -1}}}) == "/arcs/0/cost");
  CHECK(field_of(NetPathInstance{2, {{0, 1, 1.0, 0}}, {{0, 1, 1, -1}}}) == "/arcs/0/capacity");
  CHECK(field_of(NetPathInstance{2, {{0, 1, 1.0, 1}}, {{1, 1, 1, -1}}}) == "/tasks/0");
  CHECK(field_of(NetPathInstance{2, {{0, 1, 1.0, 1}}, {{0, 1, 1, 0}}}) == "/tasks/0/max_hops");
  CHECK(field_of(NetPathInstance{2, {{0, 1, 1.0, 1}}, {}}) == "/tasks");
  CHECK_THROWS_AS(build_model(Instance(CuttingStockInstance{10, {}})), InstanceError);
}

TEST_CASE("instance parsing") {
  SUBCASE("round trip") {
    for (const char* name : {"cs1.json", "np1.json"}) {
      const Instance a = load_instance(support::data_path(name));
      const std::string text = dump_instance(a);
      CHECK(dump_instance(parse_instance(text)) == text);
      CHECK(text.back() == '\n');
    }
  }
  SUBCASE("syntax errors carry a position") {
    try {
      parse_instance("{\n  \"type\": \"cutting_stock\",\n  \"roll_width\": 10,,\n}");
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(e.line() == 3);
      CHECK(e.column() > 0);
    }
  }
  SUBCASE("schema errors carry a field") {
    try {
      parse_instance(R"({"type": "cutting_stock", "roll_width": "ten", "items": []})");
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(e.field() == "/roll_width");
    }
    CHECK_THROWS_AS(parse_instance(R"({"type": "bin_packing"})"), InputError);
    CHECK_THROWS_AS(parse_instance(R"({"type": "cutting_stock", "roll_width": 5,
        "items": [{"size": 6, "demand": 1}]})"),
                    InputError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_instance("/nonexistent/x.json"), InputError); }
}

TEST_CASE("cutting stock generator") {
  CuttingStockGenParams p;
  p.items = 6;
  p.min_size = 4;
  p.max_size = 12;
  p.width = 30;
  p.max_demand = 5;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = generate_cutting_stock(seed, p);
    CHECK(dump_instance(a) == dump_instance(generate_cutting_stock(seed, p)));
    CHECK_NOTHROW(check_instance(a));
    CHECK(a.items.size() == 6);
    for (const auto& it : a.items) {
      CHECK(it.size >= 4);
      CHECK(it.size <= 12);
      CHECK(it.demand >= 1);
      CHECK(it.demand <= 5);
    }
  }
  CHECK(dump_instance(generate_cutting_stock(1, p)) != dump_instance(generate_cutting_stock(2, p)));
  p.min_size = 31;
  p.max_size = 40;
  CHECK_THROWS_AS(generate_cutting_stock(0, p), std::invalid_argument);
  p.min_size = 0;
  CHECK_THROWS_AS(generate_cutting_stock(0, p), std::invalid_argument);
}

TEST_CASE("net path generator") {
  NetPathGenParams p;
  p.nodes = 7;
  p.tasks = 3;
  p.max_hops = 3;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = generate_net_path(seed, p);
    CHECK(dump_instance(a) == dump_instance(generate_net_path(seed, p)));
    CHECK_NOTHROW(check_instance(a));
    // Every task is routable alone within its hop limit.
    for (const auto& t : a.tasks) {
      CHECK(t.max_hops == 3);
      bool found = false;
      for (const auto& path : support::simple_paths(a, t.src, t.dst)) {
        bool fits = static_cast<int>(path.size()) <= 3;
        for (int arc : path) fits = fits && a.arcs[arc].capacity >= t.demand;
        found = found || fits;
      }
      CHECK(found);
    }
  }
  p.max_demand = 5;
  CHECK_THROWS_AS(generate_net_path(0, p), std::invalid_argument);
}
