// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.
//
// Penalty refinement of a consensus estimate.
//
// Counting inliers is equivalent to driving the complementarity system
//
//   s_i >= c_i^T v - b_i,  s, v >= 0,  u in [0,1]^M,
//   u_i * (s_i - c_i^T v + b_i) = 0,   s_i * (1 - u_i) = 0
//
// to a point with as few u_i = 1 as possible: u flags the violated rows. The
// refiner minimizes the exact penalty
//
//   P(z | alpha) = ||u||_1 + alpha * Q(z),
//   Q(z) = sum_i [ s_i - u_i (c_i^T v - b_i) ]
//
// by alternating two exact block minimizations (a Frank-Wolfe step on the
// feasible polytope): an LP over (s, v) with u fixed, and the closed form
// u_i = 1 iff 1 - alpha (c_i^T v - b_i) <= 0 with (s, v) fixed. Each sweep is
// nonincreasing in P. When the inner loop stalls, alpha grows by kappa until
// the complementarity residual Q is negligible, at which point u is binary
// and M - sum(u) counts the satisfied rows.
//
// The LP keeps the same constraint matrix throughout, so one simplex basis
// warm-starts every inner iteration; the first solve starts from an analytic
// basis (violated rows enter on their slack variable s_i) and skips phase 1.
// A large guard box v <= vmax keeps the LP bounded when u temporarily flags
// enough rows to open an unbounded direction; hitting the guard taints the
// result and is reported in the warnings.

#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "maxcon/core.hpp"
#include "maxcon/simplex.hpp"
#include "maxcon/types.hpp"

namespace maxcon {

struct PenaltyConfig {
  double alpha0 = 0.5;  // initial penalty weight
  double kappa = 5.0;   // growth factor per outer iteration
  double inner_tol = 1e-8;  // inner stop on |delta P|, x (1 + |P at entry|)
  double comp_tol = 1e-6;   // outer stop on Q, x (1 + ||b||_inf)
  int max_outer = 50;
  int max_inner = 1000;
  double guard_scale = 1e6;  // lifted-variable guard box factor
};

struct EpResult {
  FitResult fit;
  SolveState state;            // final (u, s, v)
  double comp_residual = 0.0;  // Q at exit
  double alpha_final = 0.0;
};

namespace detail {

// LP over (s, v) with u fixed:  min sum(s) - (C^T u)^T v
// s.t. C v - s <= b, s >= 0, 0 <= v <= vmax. Variable order: s block then v
// block; the guard rows (one per lifted coordinate) follow the data rows.
inline LpProblem lp1_problem(const ConstraintSet& cs, double vmax) {
  const int m = cs.rows();
  const int dl = cs.dim_lifted();
  const int n = m + dl;
  LpProblem p;
  p.objective = Eigen::VectorXd::Zero(n);
  p.objective.head(m).setOnes();
  p.ineq_a = Eigen::MatrixXd::Zero(m, n);
  p.ineq_a.leftCols(m) = -Eigen::MatrixXd::Identity(m, m);
  p.ineq_a.rightCols(dl) = cs.c;
  p.ineq_b = cs.b;
  p.lower = Eigen::VectorXd::Zero(n);
  p.upper = Eigen::VectorXd::Constant(n, kInf);
  if (std::isfinite(vmax)) {
    p.upper.tail(dl).setConstant(vmax);
    p.guard_upper.assign(n, 0);
    for (int k = 0; k < dl; ++k) p.guard_upper[m + k] = 1;
  }
  return p;
}

// Guard box scale: generous multiple of the constraint data so that genuine
// optima are never clipped.
inline double lp1_guard(const ConstraintSet& cs, double factor) {
  double cmin = kInf;
  for (int i = 0; i < cs.c.rows(); ++i) {
    for (int j = 0; j < cs.c.cols(); ++j) {
      const double a = std::abs(cs.c(i, j));
      if (a > 0.0 && a < cmin) cmin = a;
    }
  }
  const double bmax = cs.b.size() ? cs.b.cwiseAbs().maxCoeff() : 0.0;
  return factor * (1.0 + bmax / std::max(1e-12, std::isfinite(cmin) ? cmin : 1.0));
}

// Feasible start basis for lp1_problem: rows with b_i < 0 enter on their s_i
// column, every other row on its slack. Diagonal basis, so phase 1 is free.
inline LpWarmState lp1_start_basis(const ConstraintSet& cs, bool guarded) {
  const int m = cs.rows();
  const int dl = cs.dim_lifted();
  const int nstd = m + dl;
  std::vector<std::pair<int, double>> unit;
  unit.reserve(m + dl);
  for (int i = 0; i < m; ++i) {
    if (cs.b(i) < 0.0) unit.emplace_back(i, -1.0);
    else unit.emplace_back(nstd + i, 1.0);
  }
  if (guarded) {
    for (int k = 0; k < dl; ++k) unit.emplace_back(nstd + m + k, 1.0);
  }
  return lp_unit_basis(unit);
}

}  // namespace detail

inline EpResult ep_solve(const ConstraintSet& cs, const Eigen::VectorXd& theta0,
                         const PenaltyConfig& cfg = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  check_consistent(cs);
  const int m = cs.rows();
  const int dl = cs.dim_lifted();

  EpResult out;
  out.state = init_state(theta0, cs);
  SolveState& z = out.state;
  FitResult& fit = out.fit;

  const double vmax = detail::lp1_guard(cs, cfg.guard_scale);
  LpProblem lp = detail::lp1_problem(cs, vmax);
  LpWarmState warm = detail::lp1_start_basis(cs, true);

  const double bscale = 1.0 + cs.b.cwiseAbs().maxCoeff();
  double alpha = cfg.alpha0;
  bool warned_guard = false, warned_monotone = false, warned_cap = false;
  int total_inner = 0;

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    const double p_entry = penalty_value(z, cs, alpha);
    double p_prev = p_entry;
    bool inner_stalled = true;  // cleared when the loop exits on its tolerance
    for (int inner = 0; inner < cfg.max_inner; ++inner) {
      // Block 1: exact LP minimization over (s, v) with u fixed.
      lp.objective.tail(dl) = -cs.c.transpose() * z.u;
      const LpSolution sol = solve_lp(lp, &warm);
      if (sol.status == LpStatus::kBoundClipped) {
        fit.tainted = true;
        if (!warned_guard) {
          fit.warnings.push_back(
              "lifted-variable guard box active; solution may be clipped");
          warned_guard = true;
        }
      } else if (sol.status != LpStatus::kOptimal) {
        fit.converged = false;
        fit.tainted = true;
        fit.warnings.push_back(std::string("inner LP failed: ") +
                               to_string(sol.status));
        goto done;
      }
      z.s = sol.x.head(m);
      z.v = sol.x.tail(dl);

      // Block 2: closed-form minimization over u in [0,1]^M with (s, v)
      // fixed; the coefficient of u_i in P is 1 - alpha*(c_i^T v - b_i).
      const Eigen::VectorXd r = cs.c * z.v - cs.b;
      for (int i = 0; i < m; ++i) z.u(i) = 1.0 - alpha * r(i) <= 0.0 ? 1.0 : 0.0;

      ++total_inner;
      const double p_now = penalty_value(z, cs, alpha);
      fit.trace.push_back(
          {total_inner, p_now, complementarity_residual(z, cs)});
      if (p_now > p_prev + 1e-9 * (1.0 + std::abs(p_entry)) &&
          !warned_monotone) {
        fit.warnings.push_back("penalty objective increased beyond tolerance");
        warned_monotone = true;
      }
      if (std::abs(p_now - p_prev) <= cfg.inner_tol * (1.0 + std::abs(p_entry))) {
        p_prev = p_now;
        inner_stalled = false;
        break;
      }
      p_prev = p_now;
    }
    if (inner_stalled && !warned_cap) {
      fit.warnings.push_back("inner iteration cap reached before the penalty stalled");
      warned_cap = true;
    }
    out.comp_residual = complementarity_residual(z, cs);
    if (out.comp_residual <= cfg.comp_tol * bscale) {
      fit.converged = true;
      goto done;
    }
    alpha *= cfg.kappa;
  }
  fit.converged = false;
  fit.warnings.push_back("complementarity residual did not reach tolerance");

done:
  out.alpha_final = alpha;
  out.comp_residual = complementarity_residual(z, cs);
  fit.iterations = total_inner;
  fit.theta = recover_theta(z.v);
  const ConsensusResult cons = consensus(fit.theta, cs);
  fit.consensus = cons.count;
  fit.inlier_mask = cons.mask;
  fit.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
  return out;
}

}  // namespace maxcon
