#pragma once

#include <stdexcept>
#include <vector>

#include "cgbp/lp_core.hpp"
#include "cgbp/master.hpp"
#include "cgbp/model.hpp"

// Brute-force ground truth for small instances. Uses lp_core and the model
// types only; none of the master or pricing machinery.
namespace cgbp::oracle {

class LimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Limits {
  long max_points = 10000;        // per block
  long max_candidates = 1000000;  // search nodes of brute_force_mip
};

// Every integer point of the block, in lexicographic order of the values
// (variable 0 most significant). Throws LimitExceeded past `limit` points
// and std::invalid_argument for unbounded or continuous variables.
std::vector<std::vector<double>> enumerate_block_points(const BlockSubmodel& block, long limit);

// The points as master columns: cost, linking coefficients and values
// computed here. Fingerprints are left 0.
std::vector<Column> enumerate_extreme_points(const CompactModel& model, int block,
                                             long limit = 10000);

struct FullLp {
  LpSolution lp;
  std::vector<Column> columns;
  std::vector<double> linking_duals;
  std::vector<double> convexity_duals;  // per block, 0 for aggregated
  std::vector<double> weights;
};

// The master over every point of every block, solved with lp_core.
FullLp full_column_lp(const CompactModel& model, const Limits& limits = {});

// cost - pi.linking - sigma_block.
double column_reduced_cost(const Column& column, const std::vector<double>& linking_duals,
                           const std::vector<double>& convexity_duals);

struct MipResult {
  bool feasible = false;
  double objective = kInf;
  IntegerSolution solution;
  long candidates = 0;
};

// Exhaustive integer optimum. Models whose blocks all carry convexity rows
// are searched block by block over enumerated points; a model made of one
// aggregated block with >= linking rows (nonnegative coefficients) is
// solved by memoized search over residual right-hand sides.
MipResult brute_force_mip(const CompactModel& model, const Limits& limits = {});

}  // namespace cgbp::oracle
