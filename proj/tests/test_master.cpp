#include <algorithm>
#include <random>
#include <type_traits>

#include "doctest.h"

#include "cgbp/apps.hpp"
#include "cgbp/instance_io.hpp"
#include "cgbp/master.hpp"
#include "support.hpp"

using namespace cgbp;

static_assert(!std::is_constructible_v<BranchCandidate, const Column&>,
              "master weights must not be branchable");
static_assert(!std::is_convertible_v<Column, BranchCandidate>);

namespace {

CuttingStockInstance cs1() {
  return std::get<CuttingStockInstance>(load_instance(support::data_path("cs1.json")));
}

// Every nonempty CS-1 roll pattern, as columns (roll variable set).
std::vector<Column> all_pattern_columns(const CompactModel& m, const CuttingStockInstance& inst) {
  std::vector<Column> cols;
  for (const auto& p : support::cutting_patterns(inst)) {
    if (std::all_of(p.begin(), p.end(), [](int v) { return v == 0; })) continue;
    std::vector<double> values(p.begin(), p.end());
    values.push_back(1.0);
    cols.push_back(make_column(m, 0, values));
  }
  return cols;
}

// Reference pattern LP for CS-1, by vertex enumeration.
double pattern_lp_value(const CuttingStockInstance& inst) {
  LpProblem p;
  std::vector<std::vector<int>> pats;
  for (const auto& pat : support::cutting_patterns(inst)) {
    if (std::any_of(pat.begin(), pat.end(), [](int v) { return v > 0; })) pats.push_back(pat);
  }
  for (std::size_t j = 0; j < pats.size(); ++j) p.add_variable(1.0);
  for (std::size_t i = 0; i < inst.items.size(); ++i) {
    std::vector<double> row;
    for (const auto& pat : pats) row.push_back(pat[i]);
    p.add_row(row, Relation::kGreaterEqual, inst.items[i].demand);
  }
  return support::vertex_enumeration(p).objective;
}

// One convexity block over two binaries with no rows.
CompactModel free_pair() {
  CompactModel m;
  const int b = m.add_block();
  m.add_variable(b, "x0", 1.0, true, 0.0, 1.0);
  m.add_variable(b, "x1", 1.0, true, 0.0, 1.0);
  return m;
}

std::vector<double> weights_for(const RmpState& rmp,
                                 const std::vector<std::pair<std::vector<double>, double>>& use) {
  std::vector<double> w(rmp.pool.size(), 0.0);
  for (const auto& [values, weight] : use) {
    bool found = false;
    for (std::size_t j = 0; j < rmp.pool.size(); ++j) {
      if (!rmp.pool[j].is_artificial && rmp.pool[j].original_values == values) {
        w[j] += weight;
        found = true;
      }
    }
    REQUIRE(found);
  }
  return w;
}

}  // namespace

TEST_CASE("fingerprints and make_column") {
  const CompactModel m = build_cutting_stock(cs1());
  const Column a = make_column(m, 0, {1.0000000001, 1.0, 1.0});
  const Column b = make_column(m, 0, {1.0, 1.0, 1.0});
  CHECK(a.original_values == std::vector<double>{1.0, 1.0, 1.0});
  CHECK(a.fingerprint == b.fingerprint);
  CHECK(a.cost == 1.0);
  CHECK(a.linking_coeffs == std::vector<double>{1.0, 1.0});
  CHECK(make_column(m, 0, {2.0, 0.0, 1.0}).fingerprint != b.fingerprint);
  const std::vector<double> v{1.0, 2.0};
  CHECK(fingerprint_of(0, v) != fingerprint_of(1, v));
}

TEST_CASE("an empty pool is covered by artificials at cost big_m") {
  const CompactModel m = build_cutting_stock(cs1());
  const RmpState rmp = init_rmp(m, {});
  CHECK(rmp.big_m == doctest::Approx(default_big_m(m)));
  CHECK(rmp.num_convexity_rows() == 0);
  const LrmpSolution s = solve_lrmp(rmp);
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective == doctest::Approx(rmp.big_m * (4 + 2)));
  CHECK(recover_original_solution(rmp, s.weights).artificial_active);
}

TEST_CASE("big_m grows with costs and linking rows") {
  const CompactModel m = build_cutting_stock(cs1());
  CHECK(default_big_m(m) == doctest::Approx(1e4 * 2.0 * 2.0));
  MasterConfig cfg;
  cfg.big_m = 99.0;
  CHECK(init_rmp(m, {}, cfg).big_m == 99.0);
}

TEST_CASE("CS-1 with every pattern reaches the pattern LP") {
  const auto inst = cs1();
  const CompactModel m = build_cutting_stock(inst);
  const RmpState rmp = init_rmp(m, all_pattern_columns(m, inst));
  const LrmpSolution s = solve_lrmp(rmp);
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective == doctest::Approx(pattern_lp_value(inst)));
  CHECK(s.duals.linking[0] == doctest::Approx(1.0 / 3.0));
  CHECK(s.duals.linking[1] == doctest::Approx(0.5));
  const auto rec = recover_original_solution(rmp, s.weights);
  CHECK_FALSE(rec.artificial_active);
  // Every pool column prices out at the optimum.
  for (const auto& col : rmp.pool) CHECK(reduced_cost(rmp, col, s.duals) >= -1e-9);
}

TEST_CASE("warm start of CS-1 gives six rolls") {
  const auto inst = cs1();
  const CompactModel m = build_cutting_stock(inst);
  const RmpState rmp = init_rmp(m, warm_start(m, Instance(inst)));
  const LrmpSolution s = solve_lrmp(rmp);
  CHECK(s.objective == doctest::Approx(6.0));
  CHECK(s.duals.linking[0] == doctest::Approx(1.0));
  CHECK(s.duals.linking[1] == doctest::Approx(1.0));
}

TEST_CASE("single column per block is forced") {
  CompactModel m;
  for (int b = 0; b < 3; ++b) {
    const int id = m.add_block();
    m.add_variable(id, "x", 1.0 + b, true, 0.0, 1.0);
  }
  std::vector<Column> cols;
  for (int b = 0; b < 3; ++b) cols.push_back(make_column(m, b, {1.0}));
  const RmpState rmp = init_rmp(m, cols);
  const LrmpSolution s = solve_lrmp(rmp);
  CHECK(s.objective == doctest::Approx(6.0));
  const auto sol = integer_solution(rmp, s.weights);
  REQUIRE(sol);
  CHECK(verify_solution(m, *sol).empty());
}

TEST_CASE("add_columns skips duplicates and rejects bad columns") {
  const auto inst = cs1();
  const CompactModel m = build_cutting_stock(inst);
  RmpState rmp = init_rmp(m, {make_column(m, 0, {3.0, 0.0, 1.0})});
  const std::size_t size = rmp.pool.size();
  CHECK(add_columns(rmp, {make_column(m, 0, {3.0, 0.0, 1.0})}) == 0);
  CHECK(add_columns(rmp, {make_column(m, 0, {1.0, 1.0, 1.0})}) == 1);
  CHECK(rmp.rejected_columns == 0);
  // Four pieces of size 3 overflow the roll.
  CHECK(add_columns(rmp, {make_column(m, 0, {4.0, 0.0, 1.0})}) == 0);
  Column tampered = make_column(m, 0, {0.0, 2.0, 1.0});
  tampered.cost = 0.5;
  CHECK(add_columns(rmp, {tampered}) == 0);
  CHECK(rmp.rejected_columns == 2);
  CHECK(rmp.pool.size() == size + 1);
}

TEST_CASE("columns outside the node bounds are rejected") {
  const auto inst = cs1();
  const CompactModel m = build_cutting_stock(inst);
  BoundSet bounds = BoundSet::from_model(m);
  bounds.upper[0] = 2.0;
  RmpState rmp = init_rmp(m, {}, {}, bounds);
  CHECK(add_columns(rmp, {make_column(m, 0, {3.0, 0.0, 1.0})}) == 0);
  CHECK(add_columns(rmp, {make_column(m, 0, {2.0, 0.0, 1.0})}) == 1);
}

TEST_CASE("reduced_cost agrees with block variable prices") {
  const CompactModel m = build_model(load_instance(support::data_path("np1.json")));
  const auto inst = load_instance(support::data_path("np1.json"));
  const RmpState rmp = init_rmp(m, warm_start(m, inst));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 0.0);
  for (int trial = 0; trial < 20; ++trial) {
    DualPrices d;
    for (int r = 0; r < m.num_linking_rows(); ++r) d.linking.push_back(u(rng));
    d.convexity = {u(rng) * 5.0, u(rng) * 5.0};
    for (const auto& col : rmp.pool) {
      if (col.is_artificial) continue;
      const auto prices = block_variable_prices(rmp, col.block_id, d);
      double rc = -d.convexity[col.block_id];
      for (std::size_t j = 0; j < prices.size(); ++j) rc += prices[j] * col.original_values[j];
      CHECK(reduced_cost(rmp, col, d) == doctest::Approx(rc));
    }
  }
}

TEST_CASE("recovery and most fractional selection") {
  const CompactModel m = free_pair();
  const RmpState rmp = init_rmp(m, {make_column(m, 0, {0.0, 1.0}), make_column(m, 0, {1.0, 1.0}),
                                    make_column(m, 0, {1.0, 0.0})});
  SUBCASE("x = (0.5, 1.0) branches on the first variable") {
    const auto w = weights_for(rmp, {{{0.0, 1.0}, 0.5}, {{1.0, 1.0}, 0.5}});
    const auto rec = recover_original_solution(rmp, w);
    CHECK(rec.blocks[0].values[0] == doctest::Approx(0.5));
    CHECK(rec.blocks[0].values[1] == doctest::Approx(1.0));
    const auto c = select_fractional(rmp, w);
    REQUIRE(c);
    const auto& v = std::get<OriginalVariableChoice>(*c);
    CHECK(v.var == 0);
    CHECK(v.value == doctest::Approx(0.5));
    CHECK_FALSE(integer_solution(rmp, w));
  }
  SUBCASE("ties go to the lowest index") {
    const auto w = weights_for(rmp, {{{1.0, 0.0}, 0.2}, {{0.0, 1.0}, 0.8}});
    const auto c = select_fractional(rmp, w);
    REQUIRE(c);
    CHECK(std::get<OriginalVariableChoice>(*c).var == 0);
  }
  SUBCASE("a single column with weight one is integral") {
    const auto w = weights_for(rmp, {{{1.0, 1.0}, 1.0}});
    CHECK_FALSE(select_fractional(rmp, w));
    const auto sol = integer_solution(rmp, w);
    REQUIRE(sol);
    CHECK(sol->objective == doctest::Approx(2.0));
  }
}

TEST_CASE("aggregated block with integral arc flows decomposes into patterns") {
  // Sizes 1, 2, 3 on a roll of 5: the four patterns below cross at load 2,
  // so half of each gives fractional weights but integral arc flows.
  const CuttingStockInstance inst{5, {{1, 2}, {2, 1}, {3, 1}}};
  const CompactModel m = build_cutting_stock(inst);
  const std::vector<std::vector<double>> pats{
      {2, 0, 0, 1}, {0, 1, 1, 1}, {2, 0, 1, 1}, {0, 1, 0, 1}};
  std::vector<Column> cols;
  for (const auto& p : pats) cols.push_back(make_column(m, 0, p));
  const RmpState rmp = init_rmp(m, cols);
  const auto w = weights_for(rmp, {{pats[0], 0.5}, {pats[1], 0.5}, {pats[2], 0.5}, {pats[3], 0.5}});
  CHECK_FALSE(select_fractional(rmp, w));
  const auto sol = integer_solution(rmp, w);
  REQUIRE(sol);
  CHECK(verify_solution(m, *sol).empty());
  CHECK(sol->objective == doctest::Approx(2.0));
}

TEST_CASE("aggregated block with fractional totals picks an aggregated variable") {
  const auto inst = cs1();
  const CompactModel m = build_cutting_stock(inst);
  const RmpState rmp = init_rmp(m, all_pattern_columns(m, inst));
  const LrmpSolution s = solve_lrmp(rmp);
  const auto c = select_fractional(rmp, s.weights);
  REQUIRE(c);
  const auto* v = std::get_if<OriginalVariableChoice>(&*c);
  REQUIRE(v);
  CHECK(v->value - std::floor(v->value) > 1e-6);
}

TEST_CASE("pattern arcs follow the layered graph") {
  KnapsackStructure ks;
  ks.item_vars = {0, 1};
  ks.sizes = {3, 5};
  ks.capacity = 10;
  ks.roll_var = 2;
  const std::vector<double> values{1, 1, 1};
  const auto arcs = pattern_arcs(ks, values);
  REQUIRE(arcs.size() == 2);
  CHECK(arcs[0] == KnapsackArc{0, 0, 1});
  CHECK(arcs[1] == KnapsackArc{1, 3, 1});
}

TEST_CASE("aggregate branch rows join the master") {
  const auto inst = cs1();
  const CompactModel m = build_cutting_stock(inst);
  // At most two rolls: the demand cannot be met, so an artificial stays.
  std::vector<AggregateBranch> br{AggregateBranch{0, 2, Relation::kLessEqual, 2.0}};
  const RmpState rmp = init_rmp(m, all_pattern_columns(m, inst), {}, {}, br);
  const LpProblem lp = assemble_lrmp(rmp);
  CHECK(lp.num_rows() == 2 + 0 + 1);
  const LrmpSolution s = solve_lrmp(rmp);
  CHECK(s.duals.branching.size() == 1);
  CHECK(recover_original_solution(rmp, s.weights).artificial_active);
  const Column roll = make_column(m, 0, {1.0, 1.0, 1.0});
  CHECK(aggregate_coefficient(m, br[0], roll) == 1.0);
}
