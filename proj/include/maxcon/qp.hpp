// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.
//
// Convex quadratic programming:
//
//   minimize    (1/2) x^T H x + g^T x
//   subject to  A x <= b
//
// Primal active-set method. The working-set subproblems reuse a Cholesky
// factor of S = A_W H^{-1} A_W^T that is updated incrementally: a rank-one
// append when a constraint enters, Givens re-triangularization when one
// leaves. H is factored once (diagonal fast path, else LLT with an escalating
// ridge when semidefinite), so the per-iteration cost is O(n^2 + k^2) for k
// active rows. Deterministic: the blocking row with the smallest step wins
// ties by lowest index, and the dropped row is the lowest-index one with a
// negative multiplier.
//
// The stateful ActiveSetQp keeps (H, A, b) and its factorizations across
// solves with changing linear terms g, carrying the working set from one
// optimum to the next; this is the fast path for alternating schemes that
// re-project onto a fixed polytope every cycle.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "maxcon/simplex.hpp"

namespace maxcon {

enum class QpStatus { kOptimal, kInfeasible, kIterationLimit, kNumericalFailure };

inline const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::kOptimal: return "optimal";
    case QpStatus::kInfeasible: return "infeasible";
    case QpStatus::kIterationLimit: return "iteration_limit";
    default: return "numerical_failure";
  }
}

struct QpProblem {
  Eigen::MatrixXd h;       // n x n, symmetric positive semidefinite
  Eigen::VectorXd g;       // n
  Eigen::MatrixXd ineq_a;  // m x n (m may be zero)
  Eigen::VectorXd ineq_b;  // m

  int num_vars() const { return static_cast<int>(g.size()); }
  int num_rows() const { return static_cast<int>(ineq_b.size()); }
};

struct QpSolution {
  QpStatus status = QpStatus::kNumericalFailure;
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd multipliers;  // >= 0, complementary with row slacks
  int iterations = 0;
  double kkt_residual = 0.0;  // max of stationarity/feasibility/complementarity
  bool regularized = false;   // a ridge was added to factor a semidefinite H
};

class ActiveSetQp {
 public:
  // General H. The matrix must be symmetric PSD; a singular H is replaced by
  // H + ridge*I with the smallest ridge that factors, the solutions are then
  // exact for the ridged problem and carry the `regularized` flag.
  ActiveSetQp(const Eigen::MatrixXd& h, const Eigen::MatrixXd& ineq_a,
              const Eigen::VectorXd& ineq_b)
      : a_(ineq_a), at_(ineq_a.transpose()), b_(ineq_b),
        n_(static_cast<int>(h.rows())) {
    validate();
    if (h.cols() != n_) throw std::invalid_argument("ActiveSetQp: H not square");
    h_ = h;
    scale_ = std::max(1.0, h.cwiseAbs().maxCoeff());
    for (;;) {
      llt_.compute(h_);
      if (llt_.info() == Eigen::Success) break;
      const double add = ridge_ == 0.0 ? 1e-8 * scale_ : 9.0 * ridge_;
      ridge_ += add;
      if (ridge_ > 1e-4 * scale_) {
        throw std::invalid_argument("ActiveSetQp: H is not positive semidefinite");
      }
      regularized_ = true;
      h_ += add * Eigen::MatrixXd::Identity(n_, n_);
    }
  }

  // Diagonal H given by its (strictly positive) diagonal.
  ActiveSetQp(const Eigen::VectorXd& h_diag, const Eigen::MatrixXd& ineq_a,
              const Eigen::VectorXd& ineq_b)
      : a_(ineq_a), at_(ineq_a.transpose()), b_(ineq_b),
        n_(static_cast<int>(h_diag.size())) {
    validate();
    if (h_diag.minCoeff() <= 0.0) {
      throw std::invalid_argument("ActiveSetQp: diagonal H must be positive");
    }
    hdiag_ = h_diag;
    diagonal_ = true;
  }

  int num_vars() const { return n_; }

  // Minimizes with linear term g from the feasible point x0. When the
  // previous solve ended at x0 (the alternating-scheme pattern) the working
  // set is kept; otherwise it is rebuilt from the rows active at x0.
  QpSolution solve(const Eigen::VectorXd& g, const Eigen::VectorXd& x0) {
    if (g.size() != n_ || x0.size() != n_) {
      throw std::invalid_argument("ActiveSetQp: size mismatch");
    }
    QpSolution sol;
    const int m = static_cast<int>(b_.size());
    const double bscale = 1.0 + (m ? b_.cwiseAbs().maxCoeff() : 0.0);
    if (m && (a_ * x0 - b_).maxCoeff() > 1e-6 * bscale) {
      sol.status = QpStatus::kInfeasible;  // caller promised a feasible start
      sol.x = x0;
      return sol;
    }
    x_ = x0;
    if (!warm_ || (x_ - last_x_).lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + x_.lpNorm<Eigen::Infinity>())) {
      rebuild_working_set();
    }
    if (m > 0) ax_.noalias() = a_ * x_;

    const double gscale = 1.0 + g.lpNorm<Eigen::Infinity>();
    const double drop_tol = 1e-10 * gscale;
    const int max_iter = 1000 + 20 * (n_ + m);
    Eigen::VectorXd d(n_), hsol(n_), p(n_), lam;
    int it = 0;
    int steps_since_refresh = 0;
    for (int attempt = 0;; ++attempt) {
    for (it = 0; it < max_iter; ++it) {
      d = -(apply_h(x_) + g);
      hsol = solve_h(d);
      const int k = static_cast<int>(w_.size());
      if (k == 0) {
        p = hsol;
        lam.resize(0);
      } else {
        Eigen::VectorXd rhs(k);
        for (int j = 0; j < k; ++j) rhs(j) = at_.col(w_[j]).dot(hsol);
        lam = chol_solve(rhs);
        // One refinement pass keeps the multipliers honest when the factor of
        // S has drifted (ill-conditioned H makes S entries huge).
        Eigen::VectorXd slam(k);
        const Eigen::VectorXd hlam = hinv_at_.leftCols(k) * lam;
        for (int j = 0; j < k; ++j) slam(j) = at_.col(w_[j]).dot(hlam);
        lam += chol_solve(rhs - slam);
        p = hsol - hinv_at_.leftCols(k) * lam;
      }

      if (p.lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + x_.lpNorm<Eigen::Infinity>())) {
        int drop = -1;
        for (int j = 0; j < k; ++j) {
          if (lam(j) < -drop_tol && (drop < 0 || w_[j] < w_[drop])) drop = j;
        }
        if (drop < 0) break;  // KKT holds
        remove_at(drop);
        continue;
      }

      // Step toward the subproblem optimum; stop at the first blocking row.
      double alpha = 1.0;
      int blocking = -1;
      if (m > 0) {
        ap_.noalias() = a_ * p;
        // A x is tracked incrementally across steps; refresh it periodically
        // so round-off cannot accumulate over long runs.
        if (++steps_since_refresh >= 128) {
          ax_.noalias() = a_ * x_;
          steps_since_refresh = 0;
        }
      }
      for (int i = 0; i < m; ++i) {
        if (in_w_[i]) continue;
        const double denom = ap_(i);
        if (denom <= 1e-12) continue;
        const double ai = std::max(0.0, (b_(i) - ax_(i)) / denom);
        if (ai < alpha - 1e-12 * (1.0 + alpha)) {
          alpha = ai;
          blocking = i;
        }
      }
      x_ += alpha * p;
      if (m > 0) ax_ += alpha * ap_;
      if (blocking >= 0) append_row(blocking);
    }
    // A stalled run on a near-singular H is restarted with a stronger ridge;
    // the iterates may have crept across working-set rows, so go back to x0.
    if (it < max_iter || diagonal_ || attempt >= 2) break;
    const double add = std::max(1e-8 * scale_, 1000.0 * ridge_);
    ridge_ += add;
    h_ += add * Eigen::MatrixXd::Identity(n_, n_);
    llt_.compute(h_);
    regularized_ = true;
    x_ = x0;
    rebuild_working_set();
    if (m > 0) ax_.noalias() = a_ * x_;
    steps_since_refresh = 0;
    }

    sol.regularized = regularized_;
    sol.x = x_;
    sol.iterations = it;
    sol.multipliers = Eigen::VectorXd::Zero(m);
    for (std::size_t j = 0; j < w_.size(); ++j) {
      if (static_cast<int>(j) < lam.size()) {
        sol.multipliers(w_[j]) = std::max(0.0, lam(static_cast<int>(j)));
      }
    }
    sol.objective = 0.5 * x_.dot(apply_h(x_)) + g.dot(x_);
    sol.kkt_residual = kkt_residual(g, sol.multipliers);
    sol.status = it >= max_iter ? QpStatus::kIterationLimit : QpStatus::kOptimal;
    if (sol.status == QpStatus::kOptimal) {
      warm_ = true;
      last_x_ = x_;
    } else {
      warm_ = false;
    }
    return sol;
  }

 private:
  void validate() {
    if (n_ < 1) throw std::invalid_argument("ActiveSetQp: no variables");
    if (a_.rows() != b_.size() || (a_.rows() > 0 && a_.cols() != n_)) {
      throw std::invalid_argument("ActiveSetQp: constraint dimension mismatch");
    }
    ap_.resize(b_.size());
    ax_.resize(b_.size());
  }

  Eigen::VectorXd apply_h(const Eigen::VectorXd& x) const {
    return diagonal_ ? Eigen::VectorXd(hdiag_.cwiseProduct(x))
                     : Eigen::VectorXd(h_ * x);
  }
  Eigen::VectorXd solve_h(const Eigen::VectorXd& r) const {
    return diagonal_ ? Eigen::VectorXd(r.cwiseQuotient(hdiag_))
                     : Eigen::VectorXd(llt_.solve(r));
  }

  // Lower-triangular solves against the incrementally maintained factor of
  // S = A_W H^{-1} A_W^T (stored in the top-left k x k block of l_).
  Eigen::VectorXd chol_solve(const Eigen::VectorXd& rhs) const {
    const int k = static_cast<int>(w_.size());
    const Eigen::VectorXd y =
        l_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(rhs);
    return l_.topLeftCorner(k, k)
        .transpose()
        .triangularView<Eigen::Upper>()
        .solve(y);
  }

  void ensure_capacity(int k) {
    if (l_.rows() >= k) return;
    const int cap = std::max(16, 2 * k);
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(cap, cap);
    if (l_.size() > 0) grown.topLeftCorner(l_.rows(), l_.cols()) = l_;
    l_.swap(grown);
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(n_, cap);
    if (hinv_at_.size() > 0) cols.leftCols(hinv_at_.cols()) = hinv_at_;
    hinv_at_.swap(cols);
  }

  void append_row(int row) {
    const int k = static_cast<int>(w_.size());
    ensure_capacity(k + 1);
    const Eigen::VectorXd hia = solve_h(at_.col(row));
    const double saa = at_.col(row).dot(hia);
    Eigen::VectorXd ell(k);
    if (k > 0) {
      Eigen::VectorXd cross(k);
      for (int j = 0; j < k; ++j) cross(j) = at_.col(w_[j]).dot(hia);
      ell = l_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(cross);
    }
    double d2 = saa - ell.squaredNorm();
    // A blocking row is independent of the working set in exact arithmetic;
    // clamp the pivot if round-off says otherwise.
    const double floor = 1e-12 * (1.0 + std::abs(saa));
    if (d2 < floor) d2 = floor;
    l_.row(k).head(k) = ell.transpose();
    l_(k, k) = std::sqrt(d2);
    hinv_at_.col(k) = hia;
    w_.push_back(row);
    in_w_[row] = 1;
  }

  void remove_at(int pos) {
    const int k = static_cast<int>(w_.size());
    in_w_[w_[pos]] = 0;
    w_.erase(w_.begin() + pos);
    for (int j = pos; j < k - 1; ++j) hinv_at_.col(j) = hinv_at_.col(j + 1);
    // Delete row `pos` of the factor, then restore triangularity of the
    // remaining rows with Givens rotations on adjacent column pairs.
    for (int r = pos; r < k - 1; ++r) l_.row(r).head(k) = l_.row(r + 1).head(k);
    for (int j = pos; j < k - 1; ++j) {
      const double a = l_(j, j), b = l_(j, j + 1);
      const double r = std::hypot(a, b);
      if (r <= 0.0) continue;
      const double c = a / r, s = b / r;
      for (int i = j; i < k - 1; ++i) {
        const double t1 = l_(i, j), t2 = l_(i, j + 1);
        l_(i, j) = c * t1 + s * t2;
        l_(i, j + 1) = -s * t1 + c * t2;
      }
      l_(j, j) = std::abs(l_(j, j));
    }
  }

  void rebuild_working_set() {
    w_.clear();
    in_w_.assign(b_.size(), 0);
    if (b_.size() == 0) return;
    ax_.noalias() = a_ * x_;
    for (int i = 0; i < static_cast<int>(b_.size()); ++i) {
      if (std::abs(ax_(i) - b_(i)) <= 1e-9 * (1.0 + std::abs(b_(i)))) {
        if (static_cast<int>(w_.size()) < n_) append_row(i);
      }
    }
  }

  double kkt_residual(const Eigen::VectorXd& g,
                      const Eigen::VectorXd& mult) const {
    double res = (apply_h(x_) + g +
                  (b_.size() ? Eigen::VectorXd(at_ * mult)
                             : Eigen::VectorXd::Zero(n_)))
                     .lpNorm<Eigen::Infinity>();
    if (b_.size() == 0) return res;
    const Eigen::VectorXd ax = a_ * x_;
    for (int i = 0; i < static_cast<int>(b_.size()); ++i) {
      const double slack = ax(i) - b_(i);
      res = std::max(res, slack);                          // primal feasibility
      res = std::max(res, std::abs(mult(i) * slack));      // complementarity
    }
    return res;
  }

  Eigen::MatrixXd a_;
  Eigen::MatrixXd at_;  // A^T: row dots run down contiguous columns
  Eigen::VectorXd b_;
  int n_;
  Eigen::MatrixXd h_;
  Eigen::VectorXd hdiag_;
  bool diagonal_ = false;
  bool regularized_ = false;
  double scale_ = 1.0;
  double ridge_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;

  std::vector<int> w_;
  std::vector<std::uint8_t> in_w_;
  Eigen::MatrixXd l_;         // Cholesky factor of S, top-left k x k
  Eigen::MatrixXd hinv_at_;   // columns H^{-1} a_j for j in the working set
  Eigen::VectorXd x_, last_x_;
  Eigen::VectorXd ap_, ax_;  // step-scan work vectors
  bool warm_ = false;
};

/// One-shot solve. A feasible start is found internally: the origin when
/// b >= 0, otherwise a zero-objective LP over the same rows.
inline QpSolution solve_qp(const QpProblem& p) {
  const int n = p.num_vars();
  const int m = p.num_rows();
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  if (m > 0 && p.ineq_b.minCoeff() < 0.0) {
    LpProblem feas;
    feas.objective = Eigen::VectorXd::Zero(n);
    feas.ineq_a = p.ineq_a;
    feas.ineq_b = p.ineq_b;
    feas.lower = Eigen::VectorXd::Constant(n, -kInf);
    feas.upper = Eigen::VectorXd::Constant(n, kInf);
    const LpSolution lp = solve_lp(feas);
    if (lp.status == LpStatus::kInfeasible) {
      QpSolution sol;
      sol.status = QpStatus::kInfeasible;
      sol.x = Eigen::VectorXd::Zero(n);
      return sol;
    }
    if (lp.status != LpStatus::kOptimal) {
      QpSolution sol;
      sol.status = QpStatus::kNumericalFailure;
      sol.x = Eigen::VectorXd::Zero(n);
      return sol;
    }
    x0 = lp.x;
  }
  ActiveSetQp solver(p.h, p.ineq_a, p.ineq_b);
  return solver.solve(p.g, x0);
}

/// Closed form for the rank-one-coupled projection
///
///   minimize_v  (c^T v - k)^2 + ||v - w||^2
///
/// whose normal equations (I + c c^T) v = w + k c invert by the
/// Sherman-Morrison identity:
inline Eigen::VectorXd solve_rank_one_qp(const Eigen::VectorXd& c, double k,
                                         const Eigen::VectorXd& w) {
  if (c.size() != w.size()) {
    throw std::invalid_argument("solve_rank_one_qp: size mismatch");
  }
  return w + ((k - c.dot(w)) / (1.0 + c.squaredNorm())) * c;
}

}  // namespace maxcon
