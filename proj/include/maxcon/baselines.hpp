// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.
//
// Reference fitters the refiners are measured against. All of them count
// consensus through the same grouped constraint set as everything else, so
// numbers are comparable across methods:
//
//   lsq_fit      minimum-norm least squares (rank warning when deficient)
//   ransac_fit   random minimal subsets, adaptive iteration bound, no refit
//   lo_ransac_fit  + a bounded local-optimization burst on each new best;
//                the gated variant only triggers once the incumbent looks
//                non-trivial (> 10% consensus). The burst draws from its own
//                generator seeded by (seed, outer iteration), so a run in
//                which it never triggers is byte-identical to ransac_fit.
//   l1_fit       minimum total violation beyond the band (one LP)
//   linf_fit     iterative worst-residual removal via Chebyshev subproblems,
//                each solved in its dual (a handful of rows instead of one
//                per datum), with the fit and minimax level read off the
//                multipliers.

#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "maxcon/core.hpp"
#include "maxcon/penalty.hpp"
#include "maxcon/rng.hpp"
#include "maxcon/simplex.hpp"
#include "maxcon/types.hpp"

namespace maxcon {

struct RansacConfig {
  double confidence = 0.99;
  int max_iterations = 10000;
  std::uint64_t seed = 0;
};

// Produces model candidates from a minimal index subset; empty result means
// the subset is degenerate (it still consumes an iteration).
using MinimalSolver =
    std::function<std::vector<Eigen::VectorXd>(const std::vector<int>&)>;

namespace detail {

inline double elapsed_since(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// Iterations needed to sample an all-inlier subset of size k with the given
// confidence, assuming inlier ratio w.
inline int adaptive_bound(double w, int k, double confidence, int cap) {
  if (w <= 0.0 || confidence >= 1.0) return cap;
  if (confidence <= 0.0) return 1;
  const double p = std::pow(w, k);
  if (p <= 0.0) return cap;
  if (p >= 1.0) return 1;
  const double t = std::log1p(-confidence) / std::log1p(-p);
  if (!std::isfinite(t) || t >= static_cast<double>(cap)) return cap;
  return std::max(1, static_cast<int>(std::ceil(t)));
}

// Minimum-norm least squares over a row subset (all rows when empty).
inline Eigen::VectorXd lsq_theta(const RegressionDataset& data,
                                 const std::vector<int>& rows, int* rank_out) {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  if (rows.empty()) {
    x = data.x;
    y = data.y;
  } else {
    x.resize(rows.size(), data.d());
    y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      x.row(static_cast<int>(i)) = data.x.row(rows[i]);
      y(static_cast<int>(i)) = data.y(rows[i]);
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  if (rank_out) *rank_out = static_cast<int>(cod.rank());
  return cod.solve(y);
}

// Exact solve on a d-point subset; empty when numerically degenerate.
inline MinimalSolver linear_minimal_solver(const RegressionDataset& data) {
  return [&data](const std::vector<int>& idx) {
    const int d = data.d();
    Eigen::MatrixXd x(d, d);
    Eigen::VectorXd y(d);
    for (int i = 0; i < d; ++i) {
      x.row(i) = data.x.row(idx[static_cast<std::size_t>(i)]);
      y(i) = data.y(idx[static_cast<std::size_t>(i)]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0 || smax / smin > 1e10) return std::vector<Eigen::VectorXd>{};
    return std::vector<Eigen::VectorXd>{svd.solve(y)};
  };
}

}  // namespace detail

inline FitResult lsq_fit(const RegressionDataset& data,
                         const ConstraintSet& cs) {
  const auto t0 = std::chrono::steady_clock::now();
  FitResult fit;
  int rank = 0;
  fit.theta = detail::lsq_theta(data, {}, &rank);
  if (rank < data.d()) {
    fit.warnings.push_back(
        "design matrix is rank deficient; returning the minimum-norm fit");
  }
  const ConsensusResult cons = consensus(fit.theta, cs);
  fit.consensus = cons.count;
  fit.inlier_mask = cons.mask;
  fit.iterations = 1;
  fit.wall_time = detail::elapsed_since(t0);
  return fit;
}

/// Consensus maximization by random minimal subsets over the data groups of
/// cs. `local_opt`, when given, is invoked on every strict improvement with
/// the outer iteration number and may improve the incumbent in place.
inline FitResult sampling_fit(
    int num_data, int subset_size, const MinimalSolver& minimal,
    const ConstraintSet& cs, const RansacConfig& cfg,
    const std::function<void(int, FitResult&)>& local_opt = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  if (subset_size < 1 || subset_size > num_data) {
    throw std::invalid_argument("sampling_fit: bad subset size");
  }
  Rng rng(cfg.seed);
  FitResult best;
  best.theta = Eigen::VectorXd::Zero(cs.dim());
  best.inlier_mask.assign(static_cast<std::size_t>(num_data), 0);
  best.consensus = 0;

  int bound = cfg.max_iterations;
  int t = 0;
  while (t < bound) {
    const std::vector<int> idx = sample_indices(num_data, subset_size, rng);
    ++t;
    for (const Eigen::VectorXd& cand : minimal(idx)) {
      const ConsensusResult cons = consensus(cand, cs);
      if (cons.count > best.consensus) {
        best.theta = cand;
        best.consensus = cons.count;
        best.inlier_mask = cons.mask;
        if (local_opt) local_opt(t, best);
        bound = std::min(
            cfg.max_iterations,
            detail::adaptive_bound(
                static_cast<double>(best.consensus) / num_data, subset_size,
                cfg.confidence, cfg.max_iterations));
      }
    }
  }
  best.iterations = t;
  best.wall_time = detail::elapsed_since(t0);
  return best;
}

inline FitResult ransac_fit(const RegressionDataset& data,
                            const ConstraintSet& cs, const RansacConfig& cfg) {
  return sampling_fit(cs.num_data(), data.d(),
                      detail::linear_minimal_solver(data), cs, cfg);
}

/// ransac_fit plus a local-optimization burst on each strict improvement: up
/// to 100 least-squares fits on double-minimal subsets of the incumbent
/// inliers. `gated` postpones the burst until the incumbent exceeds 10%
/// consensus. The burst uses its own generator seeded from (seed, outer
/// iteration); when it never fires the output is byte-identical to
/// ransac_fit.
inline FitResult lo_ransac_fit(const RegressionDataset& data,
                               const ConstraintSet& cs,
                               const RansacConfig& cfg, bool gated = false) {
  const int n = cs.num_data();
  const int d = data.d();
  auto burst = [&](int t, FitResult& best) {
    if (gated && best.consensus <= n / 10) return;
    Rng inner(splitmix64(cfg.seed ^ (0x517cc1b7ULL + static_cast<std::uint64_t>(t))));
    std::vector<int> inliers;
    for (int j = 0; j < n; ++j) {
      if (best.inlier_mask[static_cast<std::size_t>(j)]) inliers.push_back(j);
    }
    if (static_cast<int>(inliers.size()) < d) return;
    const int k = std::min(2 * d, static_cast<int>(inliers.size()));
    for (int trial = 0; trial < 100; ++trial) {
      const std::vector<int> pick =
          sample_indices(static_cast<int>(inliers.size()), k, inner);
      std::vector<int> rows(pick.size());
      for (std::size_t i = 0; i < pick.size(); ++i) rows[i] = inliers[pick[i]];
      const Eigen::VectorXd cand = detail::lsq_theta(data, rows, nullptr);
      const ConsensusResult cons = consensus(cand, cs);
      if (cons.count > best.consensus) {
        best.theta = cand;
        best.consensus = cons.count;
        best.inlier_mask = cons.mask;
      }
    }
  };
  return sampling_fit(n, d, detail::linear_minimal_solver(data), cs, cfg,
                      burst);
}

/// Minimum total violation beyond the band: min sum(s) s.t. s >= Cv - b,
/// s >= 0, v >= 0. One exact LP; for interval rows this is the soft-L1 fit
/// sum_j max(0, |x_j^T theta - y_j| - eps).
inline FitResult l1_fit(const ConstraintSet& cs) {
  const auto t0 = std::chrono::steady_clock::now();
  check_consistent(cs);
  const int dl = cs.dim_lifted();
  LpProblem lp = detail::lp1_problem(cs, kInf);
  LpWarmState warm = detail::lp1_start_basis(cs, false);
  const LpSolution sol = solve_lp(lp, &warm);
  FitResult fit;
  if (sol.status != LpStatus::kOptimal) {
    fit.converged = false;
    fit.tainted = true;
    fit.warnings.push_back(std::string("violation LP failed: ") +
                           to_string(sol.status));
    fit.theta = Eigen::VectorXd::Zero(cs.dim());
  } else {
    fit.theta = recover_theta(sol.x.tail(dl));
    fit.iterations = sol.iterations;
  }
  const ConsensusResult cons = consensus(fit.theta, cs);
  fit.consensus = cons.count;
  fit.inlier_mask = cons.mask;
  fit.wall_time = detail::elapsed_since(t0);
  return fit;
}

/// Iterative worst-residual removal. Each round solves the Chebyshev level
///
///   gamma* = min_{v >= 0} max_i (c_i^T v - b_i)   over the active rows,
///
/// in its dual  min b^T mu  s.t.  C^T mu >= 0, 1^T mu = 1, mu >= 0, whose
/// constraint count is the lifted dimension plus two regardless of how much
/// data is active. The fit v* is the multiplier vector of the C^T mu >= 0
/// block and gamma* = -(dual objective). Data whose worst row attains the
/// level are removed until gamma* <= 0 (everything active fits the band).
inline FitResult linf_fit(const ConstraintSet& cs) {
  const auto t0 = std::chrono::steady_clock::now();
  check_consistent(cs);
  const int dl = cs.dim_lifted();
  const int n = cs.num_data();
  FitResult fit;
  fit.theta = Eigen::VectorXd::Zero(cs.dim());
  std::vector<std::uint8_t> active(static_cast<std::size_t>(n), 1);
  int rounds = 0;
  bool solved = false;

  for (int guard = 0; guard < n + 1; ++guard) {
    std::vector<int> rows;
    std::vector<int> row_group;
    for (int j = 0; j < n; ++j) {
      if (!active[static_cast<std::size_t>(j)]) continue;
      for (int i : cs.groups[static_cast<std::size_t>(j)]) {
        rows.push_back(i);
        row_group.push_back(j);
      }
    }
    if (rows.empty()) break;
    const int k = static_cast<int>(rows.size());

    LpProblem dual;
    dual.objective.resize(k);
    dual.ineq_a.resize(dl + 2, k);
    for (int i = 0; i < k; ++i) {
      dual.objective(i) = cs.b(rows[static_cast<std::size_t>(i)]);
      dual.ineq_a.col(i).head(dl) =
          -cs.c.row(rows[static_cast<std::size_t>(i)]).transpose();
      dual.ineq_a(dl, i) = 1.0;
      dual.ineq_a(dl + 1, i) = -1.0;
    }
    dual.ineq_b = Eigen::VectorXd::Zero(dl + 2);
    dual.ineq_b(dl) = 1.0;
    dual.ineq_b(dl + 1) = -1.0;
    dual.lower = Eigen::VectorXd::Zero(k);
    dual.upper = Eigen::VectorXd::Constant(k, kInf);

    const LpSolution sol = solve_lp(dual);
    ++rounds;
    if (sol.status != LpStatus::kOptimal) {
      fit.converged = false;
      fit.warnings.push_back(std::string("minimax subproblem ") +
                             to_string(sol.status) + "; removal stopped");
      break;
    }
    const double gamma = -sol.objective;
    const Eigen::VectorXd v = sol.row_duals.head(dl);
    fit.theta = recover_theta(v);
    if (gamma <= 0.0) {
      solved = true;
      break;
    }
    // Remove every datum whose worst row attains the level.
    bool removed = false;
    int worst = -1;
    double worst_val = -kInf;
    std::vector<double> group_val(static_cast<std::size_t>(n), -kInf);
    for (int i = 0; i < k; ++i) {
      const int j = row_group[static_cast<std::size_t>(i)];
      const double val =
          cs.c.row(rows[static_cast<std::size_t>(i)]).dot(v) -
          cs.b(rows[static_cast<std::size_t>(i)]);
      group_val[static_cast<std::size_t>(j)] =
          std::max(group_val[static_cast<std::size_t>(j)], val);
    }
    for (int j = 0; j < n; ++j) {
      if (!active[static_cast<std::size_t>(j)]) continue;
      const double val = group_val[static_cast<std::size_t>(j)];
      if (val > worst_val) {
        worst_val = val;
        worst = j;
      }
      if (val >= gamma - 1e-9 * (1.0 + std::abs(gamma))) {
        active[static_cast<std::size_t>(j)] = 0;
        removed = true;
      }
    }
    if (!removed && worst >= 0) active[static_cast<std::size_t>(worst)] = 0;
  }

  fit.converged = solved;
  fit.iterations = rounds;
  const ConsensusResult cons = consensus(fit.theta, cs);
  fit.consensus = cons.count;
  fit.inlier_mask = cons.mask;
  fit.wall_time = detail::elapsed_since(t0);
  return fit;
}

}  // namespace maxcon
