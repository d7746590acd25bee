// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.
//
// Exact consensus maximization for small interval problems by exhaustive
// enumeration. Any consensus-optimal set of data admits a maximizer that is
// the minimum-norm solution of between one and d active interval boundaries
// (when the optimal region has no vertex the problem restricts to the span
// of the active rows, where the same argument applies), so enumerating the
// min-norm solutions of all boundary subsets of size <= d touches at least
// one optimum. Tiny coordinate perturbations of every candidate guard
// against boundary ties in the count itself.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "maxcon/core.hpp"
#include "maxcon/reformulate.hpp"
#include "maxcon/types.hpp"

namespace maxcon {

struct OracleResult {
  Eigen::VectorXd theta;
  int consensus = 0;
  std::vector<std::uint8_t> inlier_mask;
  bool certified = false;  // true when the boundary enumeration completed
  long long candidates = 0;
};

namespace detail {

struct IntervalData {
  Eigen::MatrixXd x;   // n x d
  Eigen::VectorXd y;   // n
  double eps = 0.0;
};

// The oracle only understands two-row interval groups; recover the
// regression view (x_j, y_j, eps) from them.
inline IntervalData recover_intervals(const ConstraintSet& cs) {
  const int d = cs.dim();
  const int n = cs.num_data();
  IntervalData out;
  out.x.resize(n, d);
  out.y.resize(n);
  double eps = -1.0;
  for (int j = 0; j < n; ++j) {
    const auto& g = cs.groups[static_cast<std::size_t>(j)];
    if (g.size() != 2) {
      throw std::invalid_argument(
          "oracle_solve: every datum must contribute exactly two rows");
    }
    const int r0 = g[0], r1 = g[1];
    const Eigen::VectorXd a0 = cs.c.row(r0).head(d).transpose();
    const Eigen::VectorXd a1 = cs.c.row(r1).head(d).transpose();
    if ((a0 + a1).lpNorm<Eigen::Infinity>() >
        1e-9 * (1.0 + a0.lpNorm<Eigen::Infinity>())) {
      throw std::invalid_argument(
          "oracle_solve: rows of a datum must be opposite");
    }
    const double e = 0.5 * (cs.b(r0) + cs.b(r1));
    if (e <= 0.0) {
      throw std::invalid_argument("oracle_solve: non-positive interval width");
    }
    if (eps < 0.0) {
      eps = e;
    } else if (std::abs(e - eps) > 1e-9 * (1.0 + eps)) {
      throw std::invalid_argument("oracle_solve: interval widths differ");
    }
    out.x.row(j) = a0.transpose();
    out.y(j) = 0.5 * (cs.b(r0) - cs.b(r1));
  }
  out.eps = eps;
  return out;
}

// Enumerates k-subsets of {0, ..., m-1} in lexicographic order.
inline bool next_subset(std::vector<int>& idx, int m) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - k + i) --i;
  if (i < 0) return false;
  ++idx[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j) {
    idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return true;
}

}  // namespace detail

/// Exhaustive consensus maximization. Guards keep the enumeration cheap:
/// at most 30 data and at most 3 parameters, and each datum must be a
/// two-sided interval (the shape produced by linear_constraints). The
/// returned maximizer is the first-best over a fixed enumeration order, so
/// repeated calls are bit-identical.
inline OracleResult oracle_solve(const ConstraintSet& cs) {
  check_consistent(cs);
  const int d = cs.dim();
  const int n = cs.num_data();
  if (n > 30) {
    throw std::invalid_argument("oracle_solve: too many data (max 30)");
  }
  if (d > 3) {
    throw std::invalid_argument("oracle_solve: too many parameters (max 3)");
  }
  const detail::IntervalData iv = detail::recover_intervals(cs);

  OracleResult best;
  best.theta = Eigen::VectorXd::Zero(d);
  best.consensus = -1;

  const auto consider = [&](const Eigen::VectorXd& theta) {
    ++best.candidates;
    const ConsensusResult c = consensus(theta, cs);
    if (c.count > best.consensus) {
      best.consensus = c.count;
      best.theta = theta;
      best.inlier_mask = c.mask;
    }
  };
  const auto consider_with_jitter = [&](const Eigen::VectorXd& theta) {
    consider(theta);
    const double delta = 1e-7 * (1.0 + theta.lpNorm<Eigen::Infinity>());
    for (int k = 0; k < d; ++k) {
      Eigen::VectorXd t = theta;
      t(k) += delta;
      consider(t);
      t(k) = theta(k) - delta;
      consider(t);
    }
  };

  // Fixed order: the origin first, then boundary subsets by size then
  // lexicographic rank, then exact data fits the same way.
  consider_with_jitter(Eigen::VectorXd::Zero(d));

  // Boundary hyperplanes: x_j^T theta = y_j + eps (even ids) and
  // x_j^T theta = y_j - eps (odd ids).
  const int nb = 2 * n;
  long long solved_subsets = 0;
  for (int k = 1; k <= d; ++k) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    do {
      Eigen::MatrixXd a(k, d);
      Eigen::VectorXd t(k);
      for (int i = 0; i < k; ++i) {
        const int id = idx[static_cast<std::size_t>(i)];
        const int j = id / 2;
        a.row(i) = iv.x.row(j);
        t(i) = iv.y(j) + ((id % 2 == 0) ? iv.eps : -iv.eps);
      }
      const Eigen::VectorXd theta =
          a.completeOrthogonalDecomposition().solve(t);
      if (theta.allFinite()) {
        ++solved_subsets;
        consider_with_jitter(theta);
      }
    } while (detail::next_subset(idx, nb));
  }

  // Exact fits through subsets of the data (x_j^T theta = y_j).
  for (int k = 1; k <= d; ++k) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    do {
      Eigen::MatrixXd a(k, d);
      Eigen::VectorXd t(k);
      for (int i = 0; i < k; ++i) {
        a.row(i) = iv.x.row(idx[static_cast<std::size_t>(i)]);
        t(i) = iv.y(idx[static_cast<std::size_t>(i)]);
      }
      const Eigen::VectorXd theta =
          a.completeOrthogonalDecomposition().solve(t);
      if (theta.allFinite()) consider_with_jitter(theta);
    } while (detail::next_subset(idx, n));
  }

  best.certified = solved_subsets > 0;
  if (best.consensus < 0) {
    best.consensus = 0;
    best.inlier_mask.assign(static_cast<std::size_t>(n), 0);
  }
  return best;
}

/// Convenience overload for plain regression data.
inline OracleResult oracle_solve(const RegressionDataset& data, double eps) {
  return oracle_solve(linear_constraints(data, eps));
}

}  // namespace maxcon
