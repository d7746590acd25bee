// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.
//
// Dense two-phase revised simplex:
//
//   minimize    c^T x
//   subject to  A x <= b,   lower <= x <= upper
//
// Lower bounds may be -infinity (free variables, split into positive and
// negative parts); finite upper bounds become extra inequality rows; phase-1
// feasibility uses auxiliary columns priced with the same rules. The returned
// point is a vertex: the basis has one column per row and is nonsingular.
// Deterministic pivoting: entering column = lowest index with negative
// reduced cost (Bland's rule), leaving row = lowest basic column id among
// minimal-ratio rows.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace maxcon {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class LpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kBoundClipped,  // optimal, but a guard upper bound is active
  kNumericalFailure
};

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kBoundClipped: return "bound_clipped";
    default: return "numerical_failure";
  }
}

struct LpProblem {
  Eigen::VectorXd objective;  // c, length n
  Eigen::MatrixXd ineq_a;     // m0 x n
  Eigen::VectorXd ineq_b;     // m0
  Eigen::VectorXd lower;      // length n; -kInf allowed. Empty -> all zero.
  Eigen::VectorXd upper;      // length n; +kInf allowed. Empty -> all +inf.
  // Marks upper bounds that exist only as unboundedness guards; when such a
  // bound is active at the optimum the status becomes kBoundClipped.
  std::vector<std::uint8_t> guard_upper;
  int max_pivots = 0;  // 0 -> default cap

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(ineq_b.size()); }
};

inline LpProblem make_lp(const Eigen::VectorXd& objective,
                         const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  LpProblem p;
  p.objective = objective;
  p.ineq_a = a;
  p.ineq_b = b;
  p.lower = Eigen::VectorXd::Zero(objective.size());
  p.upper = Eigen::VectorXd::Constant(objective.size(), kInf);
  return p;
}

struct LpSolution {
  LpStatus status = LpStatus::kNumericalFailure;
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd row_duals;      // multipliers >= 0 for the A x <= b rows
  std::vector<int> active_rows;   // tight inequality rows
  std::vector<int> active_lower;  // variables at a finite lower bound
  std::vector<int> active_upper;  // variables at a finite upper bound
  bool guard_hit = false;
  int iterations = 0;
};

// Opaque basis carried between solves of structurally identical problems
// (same constraint matrix and bounds; the objective may change freely).
//
// Standard-form layout, stable and part of this contract: structural columns
// appear in variable order (a free variable contributes its positive part
// then its negative part), followed by one slack column per row; rows are
// the inequalities in order, followed by one upper-bound row per
// upper-bounded variable, in variable order.
struct LpWarmState {
  bool valid = false;
  std::vector<int> basic;  // standard-form basic column per row
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> binv;
};

// Warm state for a basis made of unit columns: one (column id, coefficient)
// pair per standard-form row, where the column has a single nonzero equal to
// the coefficient in that row. Feasibility is re-verified inside solve_lp.
inline LpWarmState lp_unit_basis(
    const std::vector<std::pair<int, double>>& unit_col_per_row) {
  const int m = static_cast<int>(unit_col_per_row.size());
  LpWarmState w;
  w.basic.resize(m);
  w.binv.setZero(m, m);
  for (int r = 0; r < m; ++r) {
    w.basic[r] = unit_col_per_row[r].first;
    w.binv(r, r) = 1.0 / unit_col_per_row[r].second;
  }
  w.valid = true;
  return w;
}

namespace detail {

class SimplexSolver {
 public:
  explicit SimplexSolver(const LpProblem& p) : p_(p) { build(); }

  LpSolution solve(LpWarmState* warm) {
    LpSolution sol;
    sol.x = Eigen::VectorXd::Zero(p_.num_vars());
    if (early_infeasible_) {
      sol.status = LpStatus::kInfeasible;
      return sol;
    }
    const double bscale = 1.0 + bstd_.lpNorm<Eigen::Infinity>();

    if (!try_warm_start(warm, bscale) && !cold_start(bscale, sol)) {
      return sol;  // infeasible or pivot-limit during phase 1
    }

    phase_ = 2;
    const StepResult r2 = run_simplex();
    sol.iterations = total_pivots_;
    if (r2 == StepResult::kUnbounded) {
      sol.status = LpStatus::kUnbounded;
      return sol;
    }
    if (r2 == StepResult::kPivotLimit) {
      sol.status = LpStatus::kNumericalFailure;
      return sol;
    }
    return extract(sol, bscale, warm);
  }

 private:
  enum class StepResult { kOptimal, kUnbounded, kPivotLimit };

  static bool finite(double v) { return std::isfinite(v); }

  void build() {
    const int n = p_.num_vars();
    const int m0 = p_.num_rows();
    if (n < 1) throw std::invalid_argument("solve_lp: no variables");
    if (p_.ineq_a.rows() != m0 || p_.ineq_a.cols() != n) {
      throw std::invalid_argument("solve_lp: A/b/c dimension mismatch");
    }
    lower_ = p_.lower.size() ? p_.lower : Eigen::VectorXd::Zero(n);
    upper_ = p_.upper.size() ? p_.upper : Eigen::VectorXd::Constant(n, kInf);
    if (lower_.size() != n || upper_.size() != n) {
      throw std::invalid_argument("solve_lp: bound length mismatch");
    }
    shift_ = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (lower_(j) == kInf || upper_(j) == -kInf) {
        throw std::invalid_argument("solve_lp: inverted infinite bound");
      }
      if (finite(lower_(j)) && finite(upper_(j)) && lower_(j) > upper_(j)) {
        early_infeasible_ = true;
        return;
      }
      col_var_.push_back(j);
      col_sign_.push_back(1.0);
      if (finite(lower_(j))) {
        shift_(j) = lower_(j);
      } else {
        col_var_.push_back(j);  // negative part of a free variable
        col_sign_.push_back(-1.0);
      }
      if (finite(upper_(j))) ub_var_.push_back(j);
    }
    nstd_ = static_cast<int>(col_var_.size());
    m_ = m0 + static_cast<int>(ub_var_.size());

    astd_.setZero(m_, nstd_);
    cstd_.resize(nstd_);
    for (int k = 0; k < nstd_; ++k) {
      astd_.col(k).head(m0) = col_sign_[k] * p_.ineq_a.col(col_var_[k]);
      cstd_(k) = col_sign_[k] * p_.objective(col_var_[k]);
    }
    bstd_.resize(m_);
    bstd_.head(m0) = p_.ineq_b - p_.ineq_a * shift_;
    for (std::size_t k = 0; k < ub_var_.size(); ++k) {
      const int row = m0 + static_cast<int>(k);
      const int j = ub_var_[k];
      for (int col = 0; col < nstd_; ++col) {
        if (col_var_[col] == j) astd_(row, col) = col_sign_[col];
      }
      bstd_(row) = upper_(j) - shift_(j);
    }
  }

  bool try_warm_start(LpWarmState* warm, double bscale) {
    if (!warm || !warm->valid) return false;
    if (static_cast<int>(warm->basic.size()) != m_ || warm->binv.rows() != m_ ||
        warm->binv.cols() != m_) {
      return false;
    }
    std::vector<std::uint8_t> flags(nstd_ + m_, 0);
    for (int id : warm->basic) {
      if (id < 0 || id >= nstd_ + m_ || flags[id]) return false;
      flags[id] = 1;
    }
    Eigen::VectorXd xb = warm->binv * bstd_;
    if (xb.minCoeff() < -1e-7 * bscale) return false;
    binv_ = warm->binv;
    basic_ = warm->basic;
    xb_ = xb.cwiseMax(0.0);
    in_basis_ = std::move(flags);
    n_art_ = 0;
    return true;
  }

  // Slack basis, with phase-1 auxiliary columns on rows whose right-hand
  // side is negative. Returns false (with status filled) on infeasibility.
  bool cold_start(double bscale, LpSolution& sol) {
    basic_.assign(m_, -1);
    in_basis_.assign(nstd_ + m_, 0);
    binv_.setIdentity(m_, m_);
    xb_.resize(m_);
    art_row_.clear();
    for (int r = 0; r < m_; ++r) {
      if (bstd_(r) >= 0.0) {
        basic_[r] = nstd_ + r;
        in_basis_[nstd_ + r] = 1;
        xb_(r) = bstd_(r);
      } else {
        basic_[r] = nstd_ + m_ + static_cast<int>(art_row_.size());
        art_row_.push_back(r);
        binv_(r, r) = -1.0;
        xb_(r) = -bstd_(r);
      }
    }
    n_art_ = static_cast<int>(art_row_.size());
    if (n_art_ == 0) return true;

    phase_ = 1;
    const StepResult r1 = run_simplex();
    if (r1 == StepResult::kPivotLimit) {
      sol.status = LpStatus::kNumericalFailure;
      sol.iterations = total_pivots_;
      return false;
    }
    double inf_sum = 0.0;
    for (int r = 0; r < m_; ++r) {
      if (basic_[r] >= nstd_ + m_) inf_sum += xb_(r);
    }
    if (inf_sum > 1e-8 * bscale) {
      sol.status = LpStatus::kInfeasible;
      sol.iterations = total_pivots_;
      return false;
    }
    drive_out_artificials();
    return true;
  }

  // Pivots zero-level auxiliary columns out of the basis where possible.
  // A row where no column has a usable entry is linearly dependent; its
  // auxiliary stays basic at zero and can never move again.
  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basic_[r] < nstd_ + m_) continue;
      for (int j = 0; j < nstd_ + m_; ++j) {
        if (in_basis_[j]) continue;
        dcol_ = ftran(j);
        if (std::abs(dcol_(r)) > 1e-7) {
          pivot(r, j);
          break;
        }
      }
    }
  }

  double col_cost(int id) const {
    if (id < nstd_) return phase_ == 2 ? cstd_(id) : 0.0;
    if (id < nstd_ + m_) return 0.0;
    return phase_ == 1 ? 1.0 : 0.0;
  }

  Eigen::VectorXd ftran(int id) const {
    if (id < nstd_) return binv_ * astd_.col(id);
    return binv_.col(id - nstd_);
  }

  double reduced_cost(int id, const Eigen::VectorXd& y) const {
    if (id < nstd_) return cstd_cur_(id) - y.dot(astd_.col(id));
    return -y(id - nstd_);
  }

  StepResult run_simplex() {
    const int cap = p_.max_pivots > 0 ? p_.max_pivots : 100000;
    cstd_cur_.resize(nstd_);
    for (int k = 0; k < nstd_; ++k) cstd_cur_(k) = col_cost(k);
    double cmax = 1.0;
    if (phase_ == 2 && nstd_ > 0) {
      cmax += cstd_cur_.cwiseAbs().maxCoeff();
    }
    const double tol_rc = 1e-9 * cmax;
    Eigen::VectorXd cb(m_);
    for (;;) {
      if (total_pivots_ >= cap) return StepResult::kPivotLimit;
      for (int r = 0; r < m_; ++r) cb(r) = col_cost(basic_[r]);
      y_.noalias() = binv_.transpose() * cb;
      int enter = -1;
      for (int j = 0; j < nstd_ + m_; ++j) {
        if (in_basis_[j]) continue;
        if (reduced_cost(j, y_) < -tol_rc) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return StepResult::kOptimal;
      dcol_ = ftran(enter);

      int leave = -1;
      int leave_id = std::numeric_limits<int>::max();
      double best = kInf;
      for (int r = 0; r < m_; ++r) {
        const double dr = dcol_(r);
        if (dr <= 1e-9) continue;
        const double ratio = xb_(r) / dr;
        const double band =
            leave < 0 ? 0.0 : 1e-9 * (1.0 + std::abs(best));
        if (leave < 0 || ratio < best - band) {
          leave = r;
          best = ratio;
          leave_id = basic_[r];
        } else if (ratio <= best + band && basic_[r] < leave_id) {
          leave = r;
          best = std::min(best, ratio);
          leave_id = basic_[r];
        }
      }
      if (leave < 0) return StepResult::kUnbounded;
      pivot(leave, enter);
    }
  }

  void pivot(int leave_row, int enter) {
    const double piv = dcol_(leave_row);
    binv_.row(leave_row) /= piv;
    xb_(leave_row) /= piv;
    Eigen::VectorXd d = dcol_;
    d(leave_row) = 0.0;
    binv_.noalias() -= d * binv_.row(leave_row);
    xb_.noalias() -= d * xb_(leave_row);
    xb_ = xb_.cwiseMax(0.0);
    if (basic_[leave_row] < static_cast<int>(in_basis_.size())) {
      in_basis_[basic_[leave_row]] = 0;
    }
    in_basis_[enter] = 1;
    basic_[leave_row] = enter;
    ++total_pivots_;
  }

  LpSolution extract(LpSolution& sol, double bscale, LpWarmState* warm) {
    Eigen::VectorXd x_std = Eigen::VectorXd::Zero(nstd_);
    Eigen::VectorXd slack = Eigen::VectorXd::Zero(m_);
    auto scatter = [&] {
      x_std.setZero();
      slack.setZero();
      for (int r = 0; r < m_; ++r) {
        const int id = basic_[r];
        if (id < nstd_) x_std(id) = xb_(r);
        else if (id < nstd_ + m_) slack(id - nstd_) = xb_(r);
      }
    };
    scatter();
    Eigen::VectorXd resid = astd_ * x_std + slack - bstd_;
    if (resid.lpNorm<Eigen::Infinity>() > 1e-8 * bscale) {
      // Accumulated round-off in the basis inverse: refactorize once.
      Eigen::MatrixXd basis(m_, m_);
      for (int r = 0; r < m_; ++r) {
        const int id = basic_[r];
        if (id < nstd_) basis.col(r) = astd_.col(id);
        else if (id < nstd_ + m_) basis.col(r) = Eigen::VectorXd::Unit(m_, id - nstd_);
        else basis.col(r) = -Eigen::VectorXd::Unit(m_, art_row_[id - nstd_ - m_]);
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
      binv_ = lu.inverse();
      xb_ = (binv_ * bstd_).cwiseMax(0.0);
      scatter();
      resid = astd_ * x_std + slack - bstd_;
      if (resid.lpNorm<Eigen::Infinity>() > 1e-6 * bscale) {
        sol.status = LpStatus::kNumericalFailure;
        return sol;
      }
    }

    const int n = p_.num_vars();
    sol.x = shift_;
    for (int k = 0; k < nstd_; ++k) {
      sol.x(col_var_[k]) += col_sign_[k] * x_std(k);
    }
    sol.objective = p_.objective.dot(sol.x);

    Eigen::VectorXd cb(m_);
    for (int r = 0; r < m_; ++r) cb(r) = col_cost(basic_[r]);
    y_.noalias() = binv_.transpose() * cb;
    const int m0 = p_.num_rows();
    sol.row_duals = (-y_.head(m0)).cwiseMax(0.0);

    const Eigen::VectorXd row_resid = p_.ineq_b - p_.ineq_a * sol.x;
    for (int r = 0; r < m0; ++r) {
      if (std::abs(row_resid(r)) <= 1e-7 * (1.0 + std::abs(p_.ineq_b(r)))) {
        sol.active_rows.push_back(r);
      }
    }
    for (int j = 0; j < n; ++j) {
      if (finite(lower_(j)) &&
          sol.x(j) - lower_(j) <= 1e-9 * (1.0 + std::abs(lower_(j)))) {
        sol.active_lower.push_back(j);
      }
      if (finite(upper_(j)) &&
          upper_(j) - sol.x(j) <= 1e-7 * (1.0 + std::abs(upper_(j)))) {
        sol.active_upper.push_back(j);
        if (j < static_cast<int>(p_.guard_upper.size()) && p_.guard_upper[j]) {
          sol.guard_hit = true;
        }
      }
    }
    sol.status = sol.guard_hit ? LpStatus::kBoundClipped : LpStatus::kOptimal;
    sol.iterations = total_pivots_;

    if (warm) {
      bool clean = true;
      for (int id : basic_) clean = clean && id < nstd_ + m_;
      if (clean) {
        warm->basic = basic_;
        warm->binv = binv_;
        warm->valid = true;
      } else {
        warm->valid = false;
      }
    }
    return sol;
  }

  const LpProblem& p_;
  Eigen::VectorXd lower_, upper_, shift_;
  std::vector<int> col_var_;
  std::vector<double> col_sign_;
  std::vector<int> ub_var_;
  int nstd_ = 0, m_ = 0, n_art_ = 0, phase_ = 2;
  bool early_infeasible_ = false;
  Eigen::MatrixXd astd_;
  Eigen::VectorXd bstd_, cstd_, cstd_cur_;
  std::vector<int> basic_, art_row_;
  std::vector<std::uint8_t> in_basis_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> binv_;
  Eigen::VectorXd xb_, y_, dcol_;
  int total_pivots_ = 0;
};

}  // namespace detail

/// Solves the LP; bit-identical outputs for identical (problem, warm state)
/// inputs. A valid warm state for a structurally identical problem skips
/// phase 1; on success the final basis is written back into it.
inline LpSolution solve_lp(const LpProblem& p, LpWarmState* warm = nullptr) {
  detail::SimplexSolver solver(p);
  return solver.solve(warm);
}

/// Rank of the active-constraint gradients at sol in the original variable
/// space; equals num_vars() at a vertex of the feasible polytope.
inline int lp_active_rank(const LpProblem& p, const LpSolution& sol) {
  const int n = p.num_vars();
  std::vector<Eigen::VectorXd> rows;
  for (int r : sol.active_rows) rows.push_back(p.ineq_a.row(r));
  for (int j : sol.active_lower) rows.push_back(Eigen::VectorXd::Unit(n, j));
  for (int j : sol.active_upper) rows.push_back(Eigen::VectorXd::Unit(n, j));
  if (rows.empty()) return 0;
  Eigen::MatrixXd g(static_cast<int>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) g.row(static_cast<int>(i)) = rows[i];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g);
  qr.setThreshold(1e-8);
  return static_cast<int>(qr.rank());
}

}  // namespace maxcon
