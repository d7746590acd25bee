// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace maxcon {

// Model parameters: a length-d coefficient vector.
using ModelParams = Eigen::VectorXd;

// Point-wise linear regression data: N design rows x_j in R^d with targets y_j.
struct RegressionDataset {
  Eigen::MatrixXd x;  // N x d
  Eigen::VectorXd y;  // N

  int n() const { return static_cast<int>(x.rows()); }
  int d() const { return static_cast<int>(x.cols()); }
};

// Inequality system c_i^T v <= b_i over the lifted nonnegative parameter
// vector v in R^{d+1}. Rows are grouped by the datum they encode; a datum is
// consistent with a model exactly when all rows of its group hold.
struct ConstraintSet {
  Eigen::MatrixXd c;                     // M x (d+1)
  Eigen::VectorXd b;                     // M
  std::vector<std::vector<int>> groups;  // datum -> row indices

  int rows() const { return static_cast<int>(c.rows()); }
  int dim_lifted() const { return static_cast<int>(c.cols()); }
  int dim() const { return dim_lifted() - 1; }
  int num_data() const { return static_cast<int>(groups.size()); }
};

// Throws std::invalid_argument unless sizes agree and the groups form a
// partition of the row indices.
inline void check_consistent(const ConstraintSet& cs) {
  if (cs.c.rows() != cs.b.size()) {
    throw std::invalid_argument("ConstraintSet: c/b row count mismatch");
  }
  if (cs.c.cols() < 2) {
    throw std::invalid_argument("ConstraintSet: lifted dimension must be >= 2");
  }
  std::vector<std::uint8_t> seen(cs.rows(), 0);
  for (const auto& group : cs.groups) {
    for (int i : group) {
      if (i < 0 || i >= cs.rows() || seen[i]) {
        throw std::invalid_argument("ConstraintSet: groups must partition row indices");
      }
      seen[i] = 1;
    }
  }
  for (std::uint8_t s : seen) {
    if (!s) throw std::invalid_argument("ConstraintSet: groups must partition row indices");
  }
}

// One outlier indicator, one slack per row, and the lifted parameters.
struct SolveState {
  Eigen::VectorXd u;  // M, in [0,1]
  Eigen::VectorXd s;  // M, >= 0
  Eigen::VectorXd v;  // d+1, >= 0
};

struct TracePoint {
  int iteration = 0;
  double objective = 0.0;
  double residual = 0.0;
};

// Normalized outcome of any fitting method.
struct FitResult {
  Eigen::VectorXd theta;
  std::vector<std::uint8_t> inlier_mask;  // datum-level
  int consensus = 0;
  int iterations = 0;
  std::vector<TracePoint> trace;
  double wall_time = 0.0;  // seconds
  bool converged = true;
  bool tainted = false;  // a safety guard (e.g. an LP box bound) was active
  std::vector<std::string> warnings;
};

struct ConsensusResult {
  int count = 0;
  std::vector<std::uint8_t> mask;
};

}  // namespace maxcon
