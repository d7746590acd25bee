// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.
//
// Interval-regression constraint builder. A datum (x_j, y_j) is an inlier of
// theta at tolerance eps iff |x_j^T theta - y_j| <= eps, i.e. iff both rows
//
//    x_j^T theta <= eps + y_j
//   -x_j^T theta <= eps - y_j
//
// hold. Rows are expressed over the lifted nonnegative variable
// v = [theta + g; g] with g = |min_k theta_k|: each row vector a gains a
// trailing component -sum(a), which makes c^T v = a^T theta identically in g,
// so row satisfaction does not depend on the lift offset.

#pragma once

#include <stdexcept>

#include "maxcon/types.hpp"

namespace maxcon {

inline ConstraintSet linear_constraints(const RegressionDataset& data,
                                        double epsilon) {
  if (epsilon <= 0.0) {
    throw std::invalid_argument("linear_constraints: epsilon must be > 0");
  }
  const int n = data.n();
  const int d = data.d();
  if (n == 0) throw std::invalid_argument("linear_constraints: empty dataset");

  ConstraintSet cs;
  cs.c.resize(2 * n, d + 1);
  cs.b.resize(2 * n);
  cs.groups.resize(n);
  for (int j = 0; j < n; ++j) {
    const Eigen::RowVectorXd a = data.x.row(j);
    const double asum = a.sum();
    cs.c.row(2 * j) << a, -asum;
    cs.b(2 * j) = epsilon + data.y(j);
    cs.c.row(2 * j + 1) << -a, asum;
    cs.b(2 * j + 1) = epsilon - data.y(j);
    cs.groups[j] = {2 * j, 2 * j + 1};
  }
  check_consistent(cs);
  return cs;
}

}  // namespace maxcon
