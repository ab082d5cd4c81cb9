#pragma once

#include <map>
#include <memory>
#include <span>
#include <vector>

#include "cgbp/master.hpp"

namespace cgbp {

enum class PricingMode { kExact, kHeuristic };

struct PricedColumn {
  Column column;
  double reduced_cost = 0.0;
};

struct PricerResult {
  std::vector<PricedColumn> columns;  // improving columns, best first
  // Certified minimum over the block's points when exact; otherwise the best
  // value seen. +inf when the block has no point under the node bounds.
  double best_reduced_cost = kInf;
  bool exact = false;
};

// Everything a pricer may look at for one block. Prices are already the
// per-variable reduced costs c - pi.A (plus variable-target branching
// duals); the reduced cost of a point x is prices.x - sigma - the duals of
// the pattern-graph arcs it traverses.
struct PricingRequest {
  const CompactModel* model = nullptr;
  const BlockSubmodel* block = nullptr;
  std::vector<double> prices;
  double sigma = 0.0;
  std::vector<double> lower;  // node bounds, local
  std::vector<double> upper;
  std::map<KnapsackArc, double> arc_duals;
  PricingMode mode = PricingMode::kExact;
  int max_columns = 5;
  double rc_tolerance = 1e-6;
  // Aggregated blocks never benefit from the all-zero point.
  bool aggregated = false;
};

PricingRequest make_request(const RmpState& rmp, int block, const DualPrices& duals,
                            PricingMode mode, int max_columns, double rc_tolerance);

double point_reduced_cost(const PricingRequest& request,
                          const std::vector<double>& values);

class Pricer {
 public:
  virtual ~Pricer() = default;
  virtual PricerResult price(const PricingRequest& request) const = 0;
  virtual const char* name() const = 0;
};

// Exact for any bounded block: LP-based branch and bound on the block's own
// rows. Heuristic requests return an empty non-exact result.
class GenericPricer : public Pricer {
 public:
  PricerResult price(const PricingRequest& request) const override;
  const char* name() const override { return "generic"; }
};

// Layered dynamic program over (item, load); greedy ratio fill in heuristic
// mode. Falls back to GenericPricer when the block does not match its
// knapsack structure.
class KnapsackPricer : public Pricer {
 public:
  PricerResult price(const PricingRequest& request) const override;
  const char* name() const override { return "knapsack"; }
};

// Elementary resource-constrained shortest path in exact mode, Yen's K
// shortest paths in heuristic mode. Blocks with forced arcs or negative arc
// prices go to GenericPricer, since their optimum may need a cycle.
class PathPricer : public Pricer {
 public:
  PricerResult price(const PricingRequest& request) const override;
  const char* name() const override { return "path"; }
};

// Dispatch by structure tag, with optional per-block overrides.
class PricerSet {
 public:
  PricerSet();
  void set_override(int block, std::shared_ptr<const Pricer> pricer);
  const Pricer& for_block(const BlockSubmodel& block) const;

 private:
  std::shared_ptr<const Pricer> generic_;
  std::shared_ptr<const Pricer> knapsack_;
  std::shared_ptr<const Pricer> path_;
  std::map<int, std::shared_ptr<const Pricer>> overrides_;
};

// Prices one block of the RMP at the given duals.
PricerResult price_block(const RmpState& rmp, int block, const DualPrices& duals,
                         const PricerSet& pricers, PricingMode mode,
                         int max_columns = 5, double rc_tolerance = 1e-6);

// Prices every block, optionally on worker threads; results are indexed by
// block id and each block's columns are sorted by (reduced cost,
// fingerprint) so completion order never matters.
std::vector<PricerResult> price_all(const RmpState& rmp, const DualPrices& duals,
                                    const PricerSet& pricers, PricingMode mode,
                                    int max_columns, double rc_tolerance,
                                    bool parallel);

}  // namespace cgbp
