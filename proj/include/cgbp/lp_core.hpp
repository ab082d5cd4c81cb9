#pragma once

#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cgbp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { kLessEqual, kGreaterEqual, kEqual };

const char* to_string(Relation relation);

// a·x (<=, >=, =) rhs. coeffs has one entry per problem variable.
struct LpRow {
  std::vector<double> coeffs;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

// min c·x subject to rows and lower <= x <= upper.
// Empty lower/upper mean the default bounds [0, +inf).
struct LpProblem {
  std::vector<double> costs;
  std::vector<LpRow> rows;
  std::vector<double> lower;
  std::vector<double> upper;

  int num_vars() const { return static_cast<int>(costs.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
  double lower_bound(int j) const { return lower.empty() ? 0.0 : lower[j]; }
  double upper_bound(int j) const { return upper.empty() ? kInf : upper[j]; }

  // Appends a variable, extending every existing row with a zero coefficient.
  int add_variable(double cost, double lo = 0.0, double hi = kInf);
  void add_row(std::vector<double> coeffs, Relation relation, double rhs);
};

class MalformedProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws MalformedProblem when dimensions disagree, a coefficient is NaN or
// infinite, or a bound pair is inverted.
void check_problem(const LpProblem& problem);

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(LpStatus status);

// Dual convention: duals[i] is the multiplier y_i with reduced costs
// c_j - y·A_j. For a minimization, y_i >= 0 on >= rows and y_i <= 0 on <= rows.
struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> primal;
  std::vector<double> duals;
  double objective = 0.0;
  int iterations = 0;
  // Basic variable per row; indices >= num_vars denote row logicals and
  // phase-one artificials. Exposed for determinism checks.
  std::vector<int> basis;
};

enum class PricingRule {
  // Most negative reduced cost, lowest index on ties. Falls back to Bland
  // after a run of degenerate pivots.
  kDantzig,
  // Lowest-index eligible variable throughout.
  kBland,
};

struct LpConfig {
  double tol_feas = 1e-9;
  double tol_opt = 1e-7;
  // 0 selects 50 * (rows + cols).
  int iteration_limit = 0;
  PricingRule rule = PricingRule::kDantzig;
  int degenerate_pivots_before_bland = 50;
  int refactor_interval = 64;
};

// Two-phase dense revised simplex with bounded variables.
LpSolution solve_lp(const LpProblem& problem, const LpConfig& config = {});

// c_j - duals·A_j for every variable j.
std::vector<double> reduced_costs(const LpProblem& problem,
                                  std::span<const double> duals);

struct KktReport {
  double primal_violation = 0.0;   // rows and bounds
  double dual_violation = 0.0;     // dual sign and reduced-cost sign
  double complementarity = 0.0;    // max |slack * multiplier|
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double duality_gap = 0.0;        // |primal - dual|

  bool ok(double tol_feas = 1e-9, double tol_opt = 1e-7) const;
};

KktReport verify_kkt(const LpProblem& problem, const LpSolution& solution);

// Fixed-format plain text dump, one line per row, intended for bug reports.
void write_lp_text(std::ostream& out, const LpProblem& problem);

}  // namespace cgbp
