#include <algorithm>
#include <set>

#include "doctest.h"

#include "cgbp/apps.hpp"
#include "cgbp/instance_io.hpp"
#include "cgbp/oracle.hpp"
#include "support.hpp"

using namespace cgbp;

TEST_CASE("CS-1 block points") {
  const CompactModel m = build_model(load_instance(support::data_path("cs1.json")));
  const auto pts = oracle::enumerate_block_points(block_submodel(m, 0), 1000);
  // Count (a0, a1, y) with 3 a0 + 5 a1 <= 10 y inside the variable bounds.
  int expected = 0;
  for (int a0 = 0; a0 <= 3; ++a0) {
    for (int a1 = 0; a1 <= 2; ++a1) {
      for (int y = 0; y <= 1; ++y) expected += 3 * a0 + 5 * a1 <= 10 * y;
    }
  }
  CHECK(static_cast<int>(pts.size()) == expected);
  CHECK(std::is_sorted(pts.begin(), pts.end()));
  std::set<std::vector<double>> patterns;
  for (const auto& p : pts) {
    if (p[0] + p[1] > 0) patterns.insert({p[0], p[1]});
  }
  const auto inst = std::get<CuttingStockInstance>(load_instance(support::data_path("cs1.json")));
  CHECK(patterns.size() + 1 == support::cutting_patterns(inst).size());
  CHECK_THROWS_AS(oracle::enumerate_block_points(block_submodel(m, 0), 3), oracle::LimitExceeded);
}

TEST_CASE("an empty block domain has no points") {
  CompactModel m;
  const int b = m.add_block();
  m.add_variable(b, "x", 1.0, true, 0.0, 3.0);
  m.add_block_row(b, Row{"r", {{0, 2.0}}, Relation::kEqual, 3.0});
  CHECK(oracle::enumerate_block_points(block_submodel(m, 0), 100).empty());
}

TEST_CASE("unbounded or continuous variables are refused") {
  CompactModel m;
  const int b = m.add_block();
  m.add_variable(b, "x", 1.0, true, 0.0, kInf);
  CHECK_THROWS_AS(oracle::enumerate_block_points(block_submodel(m, 0), 100), std::invalid_argument);
  CompactModel c;
  const int cb = c.add_block();
  c.add_variable(cb, "x", 1.0, false, 0.0, 1.0);
  CHECK_THROWS_AS(oracle::enumerate_block_points(block_submodel(c, 0), 100), std::invalid_argument);
}

TEST_CASE("NP-1 block points contain every simple path") {
  const Instance inst = load_instance(support::data_path("np1.json"));
  const auto& np = std::get<NetPathInstance>(inst);
  const CompactModel m = build_model(inst);
  for (int k = 0; k < 2; ++k) {
    const auto cols = oracle::enumerate_extreme_points(m, k);
    std::set<std::vector<double>> got;
    for (const auto& c : cols) {
      got.insert(c.original_values);
      double cost = 0.0;
      for (std::size_t a = 0; a < np.arcs.size(); ++a) cost += c.original_values[a] * np.arcs[a].cost;
      CHECK(c.cost == doctest::Approx(cost));
      CHECK(c.block_id == k);
    }
    const auto paths = support::simple_paths(np, np.tasks[k].src, np.tasks[k].dst);
    CHECK_FALSE(paths.empty());
    for (const auto& p : paths) {
      std::vector<double> v(np.arcs.size(), 0.0);
      for (int a : p) v[a] = 1.0;
      CHECK(got.count(v) == 1);
    }
  }
}

TEST_CASE("full column LP") {
  SUBCASE("CS-1 optimum is 7/3") {
    const CompactModel m = build_model(load_instance(support::data_path("cs1.json")));
    const auto full = oracle::full_column_lp(m);
    REQUIRE(full.lp.status == LpStatus::kOptimal);
    CHECK(full.lp.objective == doctest::Approx(7.0 / 3.0));
    // Complementary slackness: every column prices nonnegative.
    for (const auto& c : full.columns) {
      CHECK(oracle::column_reduced_cost(c, full.linking_duals, full.convexity_duals) >= -1e-9);
    }
  }
  SUBCASE("single-point blocks add their costs") {
    CompactModel m;
    for (double c : {2.0, 5.0}) {
      const int b = m.add_block();
      m.add_variable(b, "x", c, true, 1.0, 1.0);
    }
    const auto full = oracle::full_column_lp(m);
    CHECK(full.columns.size() == 2);
    CHECK(full.lp.objective == doctest::Approx(7.0));
  }
}

TEST_CASE("column reduced cost arithmetic") {
  Column c;
  c.block_id = 1;
  c.cost = 5.0;
  c.linking_coeffs = {2.0, 0.0, 1.0};
  CHECK(oracle::column_reduced_cost(c, {1.0, 9.0, 0.5}, {0.0, 1.5}) == doctest::Approx(5.0 - 2.5 - 1.5));
}

TEST_CASE("brute force MIP") {
  SUBCASE("CS-1 needs 3 rolls") {
    const CompactModel m = build_model(load_instance(support::data_path("cs1.json")));
    const auto r = oracle::brute_force_mip(m);
    REQUIRE(r.feasible);
    CHECK(r.objective == doctest::Approx(3.0));
    CHECK(verify_solution(m, r.solution).empty());
  }
  SUBCASE("NP-1 matches path assignment") {
    const Instance inst = load_instance(support::data_path("np1.json"));
    const CompactModel m = build_model(inst);
    const auto r = oracle::brute_force_mip(m);
    const auto expected = support::net_path_optimum(std::get<NetPathInstance>(inst));
    REQUIRE(expected);
    REQUIRE(r.feasible);
    CHECK(r.objective == doctest::Approx(*expected));
    CHECK(verify_solution(m, r.solution).empty());
  }
  SUBCASE("random cutting stock agrees with the residual-demand search") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      CuttingStockGenParams p;
      p.items = 3;
      p.width = 16;
      p.min_size = 3;
      p.max_size = 10;
      p.max_demand = 4;
      const auto inst = generate_cutting_stock(seed, p);
      const auto r = oracle::brute_force_mip(build_cutting_stock(inst));
      REQUIRE(r.feasible);
      CHECK(r.objective == doctest::Approx(support::cutting_stock_optimum(inst)));
    }
  }
  SUBCASE("conflicting capacity is infeasible") {
    const NetPathInstance inst{2, {{0, 1, 1.0, 1}}, {{0, 1, 1, -1}, {0, 1, 1, -1}}};
    CHECK_FALSE(oracle::brute_force_mip(build_net_path(inst)).feasible);
  }
  SUBCASE("the candidate limit is enforced") {
    const CompactModel m = build_model(load_instance(support::data_path("np1.json")));
    CHECK_THROWS_AS(oracle::brute_force_mip(m, {10000, 1}), oracle::LimitExceeded);
  }
}
