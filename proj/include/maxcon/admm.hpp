// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.
//
// Splitting-based refinement of a consensus estimate.
//
// The complementarity system behind inlier counting couples three kinds of
// structure: per-row complementarity (u_i flags a violated row, s_i carries
// its slack), polytope feasibility (s >= Cv - b, s >= 0, v >= 0), and
// agreement on shared variables. The method of multipliers splits them:
//
//   aux block i   (u'_i, s'_i, v'_i): exact complementarity for row i alone,
//   coupling      (sC, vC):           the feasible polytope,
//   primal        (u, s, v):          the consensus copy everything tracks.
//
// Each iteration minimizes the scaled augmented Lagrangian block by block:
//
//   aux:      branch u' = 0 (row satisfied: s' = 0, v' = v - lam_v_i) versus
//             branch u' = 1 (row tight: s' = c_i^T v' - b_i with v' from a
//             rank-one closed form); the cheaper branch wins, ties -> u' = 0,
//             and branch 1 is invalid when its slack comes out negative.
//   coupling: Euclidean projection of (s - lamC_s, v - lamC_v) onto the
//             polytope; rho scales out, so one warm-started active-set QP
//             with H = 2I serves every iteration.
//   primal:   closed-form averages driven by the ||u||^2 regularizer.
//   duals:    scaled ascent on every consensus mismatch.
//
// rho grows by sigma each iteration (capped) after the stop check on the
// primal change. Diagnostics record the augmented Lagrangian trace and
// rho_star, the smallest rho from which the trace is non-increasing to the
// end. The exported estimate is the averaged point projected back onto the
// polytope (then clamped for round-off); the primal iterates themselves are
// never clamped or projected.

#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "maxcon/core.hpp"
#include "maxcon/qp.hpp"
#include "maxcon/types.hpp"

namespace maxcon {

struct AdmmConfig {
  double rho0 = 0.1;
  double sigma = 2.5;    // rho growth per iteration
  double rho_max = 1e8;
  double tol = 1e-6;     // stop on primal change, x (1 + ||b||_inf)
  int max_iter = 2000;
};

struct AdmmDiagnostics {
  double coupling_residual = 0.0;  // max consensus mismatch at exit
  double feasibility = 0.0;        // polytope violation of the exported state
  double rho_star = 0.0;
  int iterations = 0;
  std::vector<double> lagrangian;  // L after each iteration
  std::vector<double> rho;         // rho in effect during each iteration
};

struct AmResult {
  FitResult fit;
  SolveState state;  // primal (u, s, v), unclamped
  AdmmDiagnostics diag;
};

inline AmResult am_solve(const ConstraintSet& cs, const Eigen::VectorXd& theta0,
                         const AdmmConfig& cfg = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  check_consistent(cs);
  const int m = cs.rows();
  const int dl = cs.dim_lifted();
  const double bscale = 1.0 + cs.b.cwiseAbs().maxCoeff();

  AmResult out;
  out.state = init_state(theta0, cs);
  SolveState& z = out.state;

  // Aux copies and scaled duals.
  Eigen::VectorXd ua = z.u, sa = z.s;              // u'_i, s'_i
  Eigen::MatrixXd va(m, dl);                       // v'_i, one row per i
  va.rowwise() = z.v.transpose();
  Eigen::VectorXd lam_u = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd lam_s = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd lam_v = Eigen::MatrixXd::Zero(m, dl);
  Eigen::VectorXd sc = z.s, lamc_s = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd vc = z.v, lamc_v = Eigen::VectorXd::Zero(dl);

  // Coupling projector: fixed polytope {Cv - s <= b, s >= 0, v >= 0} in the
  // stacked variable (s, v); rho cancels, leaving H = 2I.
  const int nq = m + dl;
  Eigen::MatrixXd qa = Eigen::MatrixXd::Zero(2 * m + dl, nq);
  qa.topLeftCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
  qa.topRightCorner(m, dl) = cs.c;
  qa.block(m, 0, m, m) = -Eigen::MatrixXd::Identity(m, m);
  qa.bottomRightCorner(dl, dl) = -Eigen::MatrixXd::Identity(dl, dl);
  Eigen::VectorXd qb = Eigen::VectorXd::Zero(2 * m + dl);
  qb.head(m) = cs.b;
  const Eigen::VectorXd proj_diag = Eigen::VectorXd::Constant(nq, 2.0);
  ActiveSetQp projector(proj_diag, qa, qb);
  Eigen::VectorXd xq(nq);
  xq << z.s, z.v;

  double rho = cfg.rho0;
  bool converged = false;
  int it = 0;
  FitResult& fit = out.fit;

  for (; it < cfg.max_iter; ++it) {
    const Eigen::VectorXd u_old = z.u, s_old = z.s, v_old = z.v;

    // --- aux blocks -------------------------------------------------------
    for (int i = 0; i < m; ++i) {
      const double lu = lam_u(i), ls = lam_s(i);
      const Eigen::VectorXd w = z.v - lam_v.row(i).transpose();
      // Branch 0: row satisfied.
      const double obj0 =
          rho * ((0.0 - z.u(i) + lu) * (0.0 - z.u(i) + lu) +
                 (0.0 - z.s(i) + ls) * (0.0 - z.s(i) + ls));
      // Branch 1: row tight.
      const Eigen::VectorXd ci = cs.c.row(i).transpose();
      const double k = cs.b(i) + z.s(i) - ls;
      const Eigen::VectorXd v1 = solve_rank_one_qp(ci, k, w);
      const double s1 = ci.dot(v1) - cs.b(i);
      bool branch1 = s1 >= 0.0;
      if (branch1) {
        const double du = 1.0 - z.u(i) + lu;
        const double ds = s1 - z.s(i) + ls;
        const double obj1 =
            1.0 + rho * (du * du + ds * ds + (v1 - z.v + lam_v.row(i).transpose()).squaredNorm());
        branch1 = obj1 < obj0;
      }
      if (branch1) {
        ua(i) = 1.0;
        sa(i) = s1;
        va.row(i) = v1.transpose();
      } else {
        ua(i) = 0.0;
        sa(i) = 0.0;
        va.row(i) = w.transpose();
      }
    }

    // --- coupling block ---------------------------------------------------
    Eigen::VectorXd target(nq);
    target.head(m) = z.s - lamc_s;
    target.tail(dl) = z.v - lamc_v;
    const QpSolution proj = projector.solve(-2.0 * target, xq);
    if (proj.status != QpStatus::kOptimal) {
      fit.tainted = true;
      fit.warnings.push_back(std::string("coupling projection failed: ") +
                             to_string(proj.status));
      break;
    }
    xq = proj.x;
    sc = xq.head(m);
    vc = xq.tail(dl);

    // --- primal averages --------------------------------------------------
    z.u = (rho / (rho + 1.0)) * (ua + lam_u);
    z.s = 0.5 * (sa + lam_s + sc + lamc_s);
    z.v = (va.colwise().sum().transpose() + lam_v.colwise().sum().transpose() +
           vc + lamc_v) /
          static_cast<double>(m + 1);

    // --- dual ascent ------------------------------------------------------
    lam_u += ua - z.u;
    lam_s += sa - z.s;
    lam_v += va - z.v.transpose().replicate(m, 1);
    lamc_s += sc - z.s;
    lamc_v += vc - z.v;

    // Augmented Lagrangian at the end of the iteration.
    double l_val = ua.sum() + z.u.squaredNorm();
    l_val += rho * ((ua - z.u + lam_u).squaredNorm() - lam_u.squaredNorm());
    l_val += rho * ((sa - z.s + lam_s).squaredNorm() - lam_s.squaredNorm());
    l_val += rho * ((va - z.v.transpose().replicate(m, 1) + lam_v).squaredNorm() -
                    lam_v.squaredNorm());
    l_val += rho * ((sc - z.s + lamc_s).squaredNorm() - lamc_s.squaredNorm());
    l_val += rho * ((vc - z.v + lamc_v).squaredNorm() - lamc_v.squaredNorm());
    out.diag.lagrangian.push_back(l_val);
    out.diag.rho.push_back(rho);

    const double dz = std::sqrt((z.u - u_old).squaredNorm() +
                                (z.s - s_old).squaredNorm() +
                                (z.v - v_old).squaredNorm());
    fit.trace.push_back({it + 1, l_val, dz});
    if (dz <= cfg.tol * bscale) {
      converged = true;
      ++it;
      break;
    }
    rho = std::min(cfg.sigma * rho, cfg.rho_max);
  }

  // rho_star: the rho in effect at the earliest iteration from which L never
  // increases (within round-off) through to the end.
  const auto& lt = out.diag.lagrangian;
  int star = 0;
  for (std::size_t t = 1; t < lt.size(); ++t) {
    if (lt[t] > lt[t - 1] + 1e-8 * (1.0 + std::abs(lt[t - 1]))) {
      star = static_cast<int>(t);
    }
  }
  out.diag.rho_star = out.diag.rho.empty() ? cfg.rho0
                                           : out.diag.rho[static_cast<std::size_t>(star)];
  out.diag.iterations = it;

  // Export: the step-size stop can fire while the averaged point still sits
  // slightly outside the polytope, so project it back through the coupling
  // QP once more, then clamp round-off to the orthant and recount.
  Eigen::VectorXd s_ex = z.s;
  Eigen::VectorXd v_ex = z.v;
  Eigen::VectorXd g_ex(nq);
  g_ex.head(m) = -2.0 * z.s;
  g_ex.tail(dl) = -2.0 * z.v;
  const QpSolution proj_ex = projector.solve(g_ex, xq);
  if (proj_ex.status == QpStatus::kOptimal) {
    s_ex = proj_ex.x.head(m);
    v_ex = proj_ex.x.tail(dl);
  }
  s_ex = s_ex.cwiseMax(0.0);
  v_ex = v_ex.cwiseMax(0.0);
  double feas = 0.0;
  const Eigen::VectorXd row_gap = cs.c * v_ex - cs.b - s_ex;
  if (m > 0) feas = std::max(0.0, row_gap.maxCoeff());
  out.diag.feasibility = feas;

  double cres = std::max((ua - z.u).lpNorm<Eigen::Infinity>(),
                         (sa - z.s).lpNorm<Eigen::Infinity>());
  cres = std::max(cres, (sc - z.s).lpNorm<Eigen::Infinity>());
  cres = std::max(cres, (vc - z.v).lpNorm<Eigen::Infinity>());
  cres = std::max(
      cres, (va - z.v.transpose().replicate(m, 1)).cwiseAbs().maxCoeff());
  out.diag.coupling_residual = cres;

  fit.converged = converged;
  fit.iterations = it;
  fit.theta = recover_theta(v_ex);
  const ConsensusResult cons = consensus(fit.theta, cs);
  fit.consensus = cons.count;
  fit.inlier_mask = cons.mask;
  fit.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
  return out;
}

}  // namespace maxcon
