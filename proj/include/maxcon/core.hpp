// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.
//
// Consensus counting and the lifted complementarity state shared by the
// penalty and splitting refiners: a model theta in R^d is scored by the
// number of data whose constraint-group rows c_i^T v(theta) <= b_i all hold.

#pragma once

#include <cmath>
#include <stdexcept>

#include "maxcon/types.hpp"

namespace maxcon {

// Residuals within this relative band of a constraint boundary still count
// as satisfied, so consensus values are stable under round-off.
inline constexpr double kConsensusTieBand = 1e-9;

/// Lifts theta in R^d to the nonnegative vector v = [theta + g*1; g] with
/// g = |min_j theta_j|. Row values are preserved: c_i^T v = a_i^T theta for
/// every row built with c_i = [a_i; -sum(a_i)].
inline Eigen::VectorXd lift_theta(const Eigen::VectorXd& theta) {
  const int d = static_cast<int>(theta.size());
  if (d < 1) throw std::invalid_argument("lift_theta: empty parameter vector");
  const double gamma = std::abs(theta.minCoeff());
  Eigen::VectorXd v(d + 1);
  v.head(d) = theta.array() + gamma;
  v(d) = gamma;
  return v;
}

/// Inverse of lift_theta: theta_k = v_k - v_{d+1}.
inline Eigen::VectorXd recover_theta(const Eigen::VectorXd& v) {
  if (v.size() < 2) throw std::invalid_argument("recover_theta: need length >= 2");
  const int d = static_cast<int>(v.size()) - 1;
  return v.head(d).array() - v(d);
}

/// Counts the data consistent with theta: datum j is an inlier iff every row
/// i of its group satisfies c_i^T v(theta) - b_i <= tol plus the tie band.
inline ConsensusResult consensus(const Eigen::VectorXd& theta,
                                 const ConstraintSet& cs, double tol = 0.0) {
  if (tol < 0.0) throw std::invalid_argument("consensus: tol must be >= 0");
  if (theta.size() != cs.dim()) {
    throw std::invalid_argument("consensus: theta dimension mismatch");
  }
  const Eigen::VectorXd v = lift_theta(theta);
  const Eigen::VectorXd r = cs.c * v - cs.b;
  ConsensusResult out;
  out.mask.assign(cs.groups.size(), 1);
  for (std::size_t j = 0; j < cs.groups.size(); ++j) {
    for (int i : cs.groups[j]) {
      if (r(i) > tol + kConsensusTieBand * (1.0 + std::abs(cs.b(i)))) {
        out.mask[j] = 0;
        break;
      }
    }
    out.count += out.mask[j];
  }
  return out;
}

/// Complementarity-feasible state at theta: u flags violated rows, s carries
/// their slack, so every row residual s_i - u_i*(c_i^T v - b_i) vanishes.
inline SolveState init_state(const Eigen::VectorXd& theta,
                             const ConstraintSet& cs) {
  if (theta.size() != cs.dim()) {
    throw std::invalid_argument("init_state: theta dimension mismatch");
  }
  SolveState z;
  z.v = lift_theta(theta);
  const Eigen::VectorXd r = cs.c * z.v - cs.b;
  z.u = (r.array() > 0.0).cast<double>();
  z.s = z.u.cwiseProduct(r);
  return z;
}

/// Per-row complementarity residuals r_i(z) = s_i - u_i*(c_i^T v - b_i).
inline Eigen::VectorXd complementarity_rows(const SolveState& z,
                                            const ConstraintSet& cs) {
  if (z.u.size() != cs.rows() || z.s.size() != cs.rows() ||
      z.v.size() != cs.dim_lifted()) {
    throw std::invalid_argument("complementarity_rows: state dimension mismatch");
  }
  return z.s - z.u.cwiseProduct(cs.c * z.v - cs.b);
}

/// Total complementarity residual Q(z); nonnegative on the feasible polytope
/// and zero exactly at complementary states.
inline double complementarity_residual(const SolveState& z,
                                       const ConstraintSet& cs) {
  return complementarity_rows(z, cs).sum();
}

/// Penalized outlier count P(z | alpha) = sum(u) + alpha * Q(z).
inline double penalty_value(const SolveState& z, const ConstraintSet& cs,
                            double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("penalty_value: alpha must be > 0");
  return z.u.sum() + alpha * complementarity_residual(z, cs);
}

}  // namespace maxcon
