#include "cgbp/lp_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <utility>

namespace cgbp {

const char* to_string(Relation relation) {
  switch (relation) {
    case Relation::kLessEqual: return "<=";
    case Relation::kGreaterEqual: return ">=";
    case Relation::kEqual: return "=";
  }
  return "?";
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration_limit";
  }
  return "?";
}

int LpProblem::add_variable(double cost, double lo, double hi) {
  const bool explicit_bounds = !lower.empty() || lo != 0.0 || hi != kInf;
  if (explicit_bounds) {
    lower.resize(costs.size(), 0.0);
    upper.resize(costs.size(), kInf);
    lower.push_back(lo);
    upper.push_back(hi);
  }
  costs.push_back(cost);
  for (auto& row : rows) row.coeffs.push_back(0.0);
  return static_cast<int>(costs.size()) - 1;
}

void LpProblem::add_row(std::vector<double> coeffs, Relation relation,
                        double rhs) {
  rows.push_back(LpRow{std::move(coeffs), relation, rhs});
}

void check_problem(const LpProblem& problem) {
  const std::size_t n = problem.costs.size();
  for (double c : problem.costs) {
    if (!std::isfinite(c)) throw MalformedProblem("non-finite cost coefficient");
  }
  if (!problem.lower.empty() || !problem.upper.empty()) {
    if (problem.lower.size() != n || problem.upper.size() != n) {
      throw MalformedProblem("bound vectors do not match variable count");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double lo = problem.lower[j];
      const double hi = problem.upper[j];
      if (std::isnan(lo) || std::isnan(hi) || lo == kInf || hi == -kInf ||
          lo > hi) {
        throw MalformedProblem("invalid bounds on variable " +
                               std::to_string(j));
      }
    }
  }
  for (std::size_t i = 0; i < problem.rows.size(); ++i) {
    const auto& row = problem.rows[i];
    if (row.coeffs.size() != n) {
      throw MalformedProblem("row " + std::to_string(i) + " has " +
                             std::to_string(row.coeffs.size()) +
                             " coefficients, expected " + std::to_string(n));
    }
    if (!std::isfinite(row.rhs)) {
      throw MalformedProblem("non-finite rhs in row " + std::to_string(i));
    }
    for (double a : row.coeffs) {
      if (!std::isfinite(a)) {
        throw MalformedProblem("non-finite coefficient in row " +
                               std::to_string(i));
      }
    }
  }
}

namespace {

enum class VarState : unsigned char { kBasic, kAtLower, kAtUpper, kFree };

enum class PhaseOutcome { kOptimal, kUnbounded, kIterationLimit };

constexpr double kPivotTol = 1e-9;
constexpr double kRatioTieTol = 1e-12;

// Variables are laid out as [structural | row logicals | artificials]. Row i
// reads A_i·x + s_i (+/- t_i) = b_i, where the logical s_i carries the row
// relation through its bounds.
class Simplex {
 public:
  Simplex(const LpProblem& problem, const LpConfig& config)
      : problem_(problem),
        config_(config),
        n_(problem.num_vars()),
        m_(problem.num_rows()) {
    iteration_limit_ = config.iteration_limit > 0
                           ? config.iteration_limit
                           : 50 * std::max(1, n_ + m_);
    build();
  }

  LpSolution run() {
    LpSolution result;
    bool has_artificials = num_vars_ > n_ + m_;
    if (has_artificials) {
      for (int j = 0; j < num_vars_; ++j) cost_[j] = j >= n_ + m_ ? 1.0 : 0.0;
      PhaseOutcome outcome = iterate();
      if (outcome == PhaseOutcome::kIterationLimit) {
        return finish(LpStatus::kIterationLimit);
      }
      refactor();
      double infeasibility = 0.0;
      for (int j = n_ + m_; j < num_vars_; ++j) infeasibility += x_[j];
      double bmax = 0.0;
      for (double b : b_) bmax = std::max(bmax, std::abs(b));
      if (infeasibility > 1e-7 * (1.0 + bmax)) {
        return finish(LpStatus::kInfeasible);
      }
      for (int j = n_ + m_; j < num_vars_; ++j) {
        hi_[j] = 0.0;
        if (state_[j] != VarState::kBasic) {
          state_[j] = VarState::kAtLower;
          x_[j] = 0.0;
        }
      }
    }
    for (int j = 0; j < num_vars_; ++j) cost_[j] = j < n_ ? problem_.costs[j] : 0.0;
    degenerate_run_ = 0;
    bland_ = config_.rule == PricingRule::kBland;
    PhaseOutcome outcome = iterate();
    switch (outcome) {
      case PhaseOutcome::kOptimal:
        refactor();
        return finish(LpStatus::kOptimal);
      case PhaseOutcome::kUnbounded:
        return finish(LpStatus::kUnbounded);
      case PhaseOutcome::kIterationLimit:
        return finish(LpStatus::kIterationLimit);
    }
    return result;
  }

 private:
  void build() {
    b_.resize(m_);
    for (int i = 0; i < m_; ++i) b_[i] = problem_.rows[i].rhs;

    columns_.assign(n_ + m_, {});
    for (int i = 0; i < m_; ++i) {
      const auto& coeffs = problem_.rows[i].coeffs;
      for (int j = 0; j < n_; ++j) {
        if (coeffs[j] != 0.0) columns_[j].emplace_back(i, coeffs[j]);
      }
      columns_[n_ + i].emplace_back(i, 1.0);
    }
    lo_.resize(n_ + m_);
    hi_.resize(n_ + m_);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = problem_.lower_bound(j);
      hi_[j] = problem_.upper_bound(j);
    }
    for (int i = 0; i < m_; ++i) {
      switch (problem_.rows[i].relation) {
        case Relation::kLessEqual: lo_[n_ + i] = 0.0; hi_[n_ + i] = kInf; break;
        case Relation::kGreaterEqual: lo_[n_ + i] = -kInf; hi_[n_ + i] = 0.0; break;
        case Relation::kEqual: lo_[n_ + i] = 0.0; hi_[n_ + i] = 0.0; break;
      }
    }

    x_.assign(n_ + m_, 0.0);
    state_.assign(n_ + m_, VarState::kAtLower);
    for (int j = 0; j < n_; ++j) place_at_bound(j);

    std::vector<double> residual = b_;
    for (int j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for (auto [row, a] : columns_[j]) residual[row] -= a * x_[j];
    }

    basis_.assign(m_, -1);
    std::vector<double> diag(m_, 1.0);
    for (int i = 0; i < m_; ++i) {
      const int s = n_ + i;
      const double r = residual[i];
      if (r >= lo_[s] && r <= hi_[s]) {
        basis_[i] = s;
        state_[s] = VarState::kBasic;
        x_[s] = r;
        continue;
      }
      const double clamp = r < lo_[s] ? lo_[s] : hi_[s];
      x_[s] = clamp;
      state_[s] = r < lo_[s] ? VarState::kAtLower : VarState::kAtUpper;
      const double sign = r - clamp > 0.0 ? 1.0 : -1.0;
      const int t = static_cast<int>(columns_.size());
      columns_.push_back({{i, sign}});
      lo_.push_back(0.0);
      hi_.push_back(kInf);
      x_.push_back(std::abs(r - clamp));
      state_.push_back(VarState::kBasic);
      basis_[i] = t;
      diag[i] = sign;
    }
    num_vars_ = static_cast<int>(columns_.size());
    cost_.assign(num_vars_, 0.0);
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[idx(i, i)] = 1.0 / diag[i];
  }

  void place_at_bound(int j) {
    if (std::isfinite(lo_[j])) {
      x_[j] = lo_[j];
      state_[j] = VarState::kAtLower;
    } else if (std::isfinite(hi_[j])) {
      x_[j] = hi_[j];
      state_[j] = VarState::kAtUpper;
    } else {
      x_[j] = 0.0;
      state_[j] = VarState::kFree;
    }
  }

  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * m_ + c;
  }

  void compute_duals(std::vector<double>& y) const {
    y.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &binv_[idx(i, 0)];
      for (int k = 0; k < m_; ++k) y[k] += cb * row[k];
    }
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double d = cost_[j];
    for (auto [row, a] : columns_[j]) d -= y[row] * a;
    return d;
  }

  // Returns the entering variable and its reduced cost, or -1 at optimality.
  std::pair<int, double> choose_entering(const std::vector<double>& y) const {
    int best = -1;
    double best_d = 0.0;
    double best_score = 0.0;
    for (int j = 0; j < num_vars_; ++j) {
      const VarState st = state_[j];
      if (st == VarState::kBasic || lo_[j] == hi_[j]) continue;
      const double d = reduced_cost(j, y);
      bool eligible = false;
      switch (st) {
        case VarState::kAtLower: eligible = d < -config_.tol_opt; break;
        case VarState::kAtUpper: eligible = d > config_.tol_opt; break;
        case VarState::kFree: eligible = std::abs(d) > config_.tol_opt; break;
        case VarState::kBasic: break;
      }
      if (!eligible) continue;
      if (bland_) return {j, d};
      if (std::abs(d) > best_score) {
        best = j;
        best_d = d;
        best_score = std::abs(d);
      }
    }
    return {best, best_d};
  }

  PhaseOutcome iterate() {
    std::vector<double> y;
    std::vector<double> alpha(m_);
    for (;;) {
      if (iterations_ >= iteration_limit_) return PhaseOutcome::kIterationLimit;
      if (pivots_since_refactor_ >= config_.refactor_interval) refactor();

      compute_duals(y);
      auto [entering, d] = choose_entering(y);
      if (entering < 0) return PhaseOutcome::kOptimal;
      ++iterations_;

      std::fill(alpha.begin(), alpha.end(), 0.0);
      for (auto [row, a] : columns_[entering]) {
        for (int i = 0; i < m_; ++i) alpha[i] += binv_[idx(i, row)] * a;
      }
      const double dir = d < 0.0 ? 1.0 : -1.0;

      int leave_row = -1;
      double step = kInf;
      bool leave_at_upper = false;
      for (int i = 0; i < m_; ++i) {
        if (std::abs(alpha[i]) <= kPivotTol) continue;
        const int bv = basis_[i];
        const double delta = -dir * alpha[i];
        double t = kInf;
        bool to_upper = false;
        if (delta < 0.0 && std::isfinite(lo_[bv])) {
          t = (x_[bv] - lo_[bv]) / -delta;
        } else if (delta > 0.0 && std::isfinite(hi_[bv])) {
          t = (hi_[bv] - x_[bv]) / delta;
          to_upper = true;
        }
        if (!std::isfinite(t)) continue;
        t = std::max(t, 0.0);
        if (leave_row < 0 || t < step - kRatioTieTol) {
          step = t;
          leave_row = i;
          leave_at_upper = to_upper;
        } else if (t <= step + kRatioTieTol && bv < basis_[leave_row]) {
          step = std::min(step, t);
          leave_row = i;
          leave_at_upper = to_upper;
        }
      }

      const double flip = hi_[entering] - lo_[entering];
      const bool bound_flip = std::isfinite(flip) && flip <= step;
      if (bound_flip) step = flip;
      if (!std::isfinite(step)) return PhaseOutcome::kUnbounded;

      if (step <= config_.tol_feas) {
        if (++degenerate_run_ > config_.degenerate_pivots_before_bland) bland_ = true;
      } else {
        degenerate_run_ = 0;
      }

      x_[entering] += dir * step;
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) x_[basis_[i]] -= dir * alpha[i] * step;
      }

      if (bound_flip) {
        state_[entering] = state_[entering] == VarState::kAtUpper
                               ? VarState::kAtLower
                               : VarState::kAtUpper;
        x_[entering] = state_[entering] == VarState::kAtUpper ? hi_[entering]
                                                              : lo_[entering];
        continue;
      }

      const int leaving = basis_[leave_row];
      if (leave_at_upper) {
        x_[leaving] = hi_[leaving];
        state_[leaving] = VarState::kAtUpper;
      } else {
        x_[leaving] = lo_[leaving];
        state_[leaving] = VarState::kAtLower;
      }
      basis_[leave_row] = entering;
      state_[entering] = VarState::kBasic;
      pivot(leave_row, alpha);
    }
  }

  void pivot(int r, const std::vector<double>& alpha) {
    const double inv = 1.0 / alpha[r];
    double* prow = &binv_[idx(r, 0)];
    for (int k = 0; k < m_; ++k) prow[k] *= inv;
    for (int i = 0; i < m_; ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      const double f = alpha[i];
      double* row = &binv_[idx(i, 0)];
      for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
    }
    ++pivots_since_refactor_;
  }

  // Recomputes the basis inverse by Gauss-Jordan elimination and the basic
  // values from the nonbasic ones.
  void refactor() {
    pivots_since_refactor_ = 0;
    if (m_ == 0) return;
    std::vector<double> work(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int c = 0; c < m_; ++c) {
      for (auto [row, a] : columns_[basis_[c]]) work[idx(row, c)] = a;
    }
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[idx(i, i)] = 1.0;
    for (int c = 0; c < m_; ++c) {
      int p = c;
      for (int r = c + 1; r < m_; ++r) {
        if (std::abs(work[idx(r, c)]) > std::abs(work[idx(p, c)])) p = r;
      }
      if (std::abs(work[idx(p, c)]) < 1e-14) {
        // Singular basis; keep the product-form inverse.
        return;
      }
      if (p != c) {
        for (int k = 0; k < m_; ++k) {
          std::swap(work[idx(p, k)], work[idx(c, k)]);
          std::swap(inv[idx(p, k)], inv[idx(c, k)]);
        }
      }
      const double f = 1.0 / work[idx(c, c)];
      for (int k = 0; k < m_; ++k) {
        work[idx(c, k)] *= f;
        inv[idx(c, k)] *= f;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double g = work[idx(r, c)];
        if (g == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          work[idx(r, k)] -= g * work[idx(c, k)];
          inv[idx(r, k)] -= g * inv[idx(c, k)];
        }
      }
    }
    binv_ = std::move(inv);

    std::vector<double> rhs = b_;
    for (int j = 0; j < num_vars_; ++j) {
      if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
      for (auto [row, a] : columns_[j]) rhs[row] -= a * x_[j];
    }
    for (int i = 0; i < m_; ++i) {
      double v = 0.0;
      const double* row = &binv_[idx(i, 0)];
      for (int k = 0; k < m_; ++k) v += row[k] * rhs[k];
      x_[basis_[i]] = v;
    }
  }

  LpSolution finish(LpStatus status) {
    LpSolution out;
    out.status = status;
    out.iterations = iterations_;
    out.primal.assign(x_.begin(), x_.begin() + n_);
    for (int j = 0; j < num_vars_; ++j) cost_[j] = j < n_ ? problem_.costs[j] : 0.0;
    compute_duals(out.duals);
    out.objective = 0.0;
    for (int j = 0; j < n_; ++j) out.objective += problem_.costs[j] * out.primal[j];
    out.basis = basis_;
    return out;
  }

  const LpProblem& problem_;
  const LpConfig& config_;
  int n_;
  int m_;
  int num_vars_ = 0;
  int iteration_limit_ = 0;
  int iterations_ = 0;
  int pivots_since_refactor_ = 0;
  int degenerate_run_ = 0;
  bool bland_ = false;

  std::vector<std::vector<std::pair<int, double>>> columns_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<double> cost_;
  std::vector<double> b_;
  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  std::vector<double> binv_;
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const LpConfig& config) {
  check_problem(problem);
  Simplex simplex(problem, config);
  return simplex.run();
}

std::vector<double> reduced_costs(const LpProblem& problem,
                                  std::span<const double> duals) {
  if (static_cast<int>(duals.size()) != problem.num_rows()) {
    throw MalformedProblem("dual vector has " + std::to_string(duals.size()) +
                           " entries, expected " +
                           std::to_string(problem.num_rows()));
  }
  std::vector<double> d = problem.costs;
  for (int i = 0; i < problem.num_rows(); ++i) {
    const auto& coeffs = problem.rows[i].coeffs;
    if (static_cast<int>(coeffs.size()) != problem.num_vars()) {
      throw MalformedProblem("row dimension mismatch");
    }
    if (duals[i] == 0.0) continue;
    for (int j = 0; j < problem.num_vars(); ++j) d[j] -= duals[i] * coeffs[j];
  }
  return d;
}

bool KktReport::ok(double tol_feas, double tol_opt) const {
  return primal_violation <= tol_feas && dual_violation <= tol_opt &&
         duality_gap <= tol_opt * (1.0 + std::abs(primal_objective));
}

KktReport verify_kkt(const LpProblem& problem, const LpSolution& solution) {
  KktReport report;
  const int n = problem.num_vars();
  const auto& x = solution.primal;
  const auto& y = solution.duals;

  for (int j = 0; j < n; ++j) {
    report.primal_objective += problem.costs[j] * x[j];
    report.primal_violation = std::max(
        {report.primal_violation, problem.lower_bound(j) - x[j],
         x[j] - problem.upper_bound(j)});
  }
  for (int i = 0; i < problem.num_rows(); ++i) {
    const auto& row = problem.rows[i];
    double activity = 0.0;
    for (int j = 0; j < n; ++j) activity += row.coeffs[j] * x[j];
    const double slack = activity - row.rhs;
    switch (row.relation) {
      case Relation::kLessEqual:
        report.primal_violation = std::max(report.primal_violation, slack);
        report.dual_violation = std::max(report.dual_violation, y[i]);
        break;
      case Relation::kGreaterEqual:
        report.primal_violation = std::max(report.primal_violation, -slack);
        report.dual_violation = std::max(report.dual_violation, -y[i]);
        break;
      case Relation::kEqual:
        report.primal_violation = std::max(report.primal_violation, std::abs(slack));
        break;
    }
    if (row.relation != Relation::kEqual) {
      report.complementarity = std::max(report.complementarity, std::abs(y[i] * slack));
    }
    report.dual_objective += y[i] * row.rhs;
  }

  const std::vector<double> d = reduced_costs(problem, y);
  for (int j = 0; j < n; ++j) {
    const double lo = problem.lower_bound(j);
    const double hi = problem.upper_bound(j);
    if (!std::isfinite(lo)) report.dual_violation = std::max(report.dual_violation, d[j]);
    if (!std::isfinite(hi)) report.dual_violation = std::max(report.dual_violation, -d[j]);
    if (d[j] > 0.0) {
      const double bound = std::isfinite(lo) ? lo : x[j];
      report.dual_objective += d[j] * bound;
      if (std::isfinite(lo)) {
        report.complementarity = std::max(report.complementarity, d[j] * (x[j] - lo));
      }
    } else if (d[j] < 0.0) {
      const double bound = std::isfinite(hi) ? hi : x[j];
      report.dual_objective += d[j] * bound;
      if (std::isfinite(hi)) {
        report.complementarity = std::max(report.complementarity, -d[j] * (hi - x[j]));
      }
    }
  }
  report.primal_violation = std::max(report.primal_violation, 0.0);
  report.duality_gap = std::abs(report.primal_objective - report.dual_objective);
  return report;
}

void write_lp_text(std::ostream& out, const LpProblem& problem) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), " %24.17g", v);
    return std::string(buf);
  };
  out << "LP " << problem.num_vars() << ' ' << problem.num_rows() << '\n';
  out << "COST";
  for (double c : problem.costs) out << num(c);
  out << '\n';
  for (int j = 0; j < problem.num_vars(); ++j) {
    out << "BOUND " << j << num(problem.lower_bound(j))
        << num(problem.upper_bound(j)) << '\n';
  }
  for (int i = 0; i < problem.num_rows(); ++i) {
    const auto& row = problem.rows[i];
    std::snprintf(buf, sizeof(buf), "ROW %6d %2s", i, to_string(row.relation));
    out << buf << num(row.rhs) << " :";
    for (double a : row.coeffs) out << num(a);
    out << '\n';
  }
}

}  // namespace cgbp
