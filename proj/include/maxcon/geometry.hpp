// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.
//
// Vision front-ends: each one turns raw measurements into the grouped
// constraint rows the solvers consume.
//
// Fractional residuals. A transfer-style residual
//
//   ( |g1^T th + h1| + |g2^T th + h2| ) / (r^T th + q)  <=  eps
//
// holds together with positive denominator iff the four sign rows
//
//   (s1 g1 + s2 g2 - eps r)^T th <= eps q - s1 h1 - s2 h2,  s1, s2 in {+1,-1}
//
// all hold: adding the (+,+) and (-,-) rows gives 0 <= 2 eps (r^T th + q),
// so the denominator condition is implied and needs no extra row. One datum
// therefore contributes a group of four rows.
//
// Algebraic linearizations map matches to plain interval regression after
// the usual isotropic normalization (centroid to the origin, mean distance
// sqrt(2)); the fitted matrix is denormalized before use.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "maxcon/reformulate.hpp"
#include "maxcon/types.hpp"

namespace maxcon {

struct Match {
  Eigen::Vector2d p1;  // point in the first image
  Eigen::Vector2d p2;  // point in the second image
};

struct CameraView {
  Eigen::Matrix<double, 3, 4> p;  // projection matrix
  Eigen::Vector2d obs;            // observed pixel
};

namespace detail {

// Appends the four sign rows of one fractional residual to (c, b).
inline void append_fractional_rows(const Eigen::VectorXd& g1, double h1,
                                   const Eigen::VectorXd& g2, double h2,
                                   const Eigen::VectorXd& r, double q,
                                   double eps, Eigen::MatrixXd& c,
                                   Eigen::VectorXd& b, int& row) {
  const int d = static_cast<int>(g1.size());
  static constexpr double kSigns[4][2] = {
      {1.0, 1.0}, {1.0, -1.0}, {-1.0, 1.0}, {-1.0, -1.0}};
  for (const auto& s : kSigns) {
    const Eigen::VectorXd a = s[0] * g1 + s[1] * g2 - eps * r;
    c.row(row).head(d) = a.transpose();
    c(row, d) = -a.sum();
    b(row) = eps * q - s[0] * h1 - s[1] * h2;
    ++row;
  }
}

inline void require_positive_eps(double eps, const char* who) {
  if (eps <= 0.0) {
    throw std::invalid_argument(std::string(who) + ": epsilon must be > 0");
  }
}

}  // namespace detail

/// Plane homography mapping p1 to p2, parametrized by its first eight
/// entries in row-major order with the bottom-right entry fixed at one. The
/// residual is the one-norm transfer error in the second image.
inline ConstraintSet homography_constraints(const std::vector<Match>& matches,
                                            double eps) {
  detail::require_positive_eps(eps, "homography_constraints");
  if (matches.empty()) {
    throw std::invalid_argument("homography_constraints: no matches");
  }
  const int n = static_cast<int>(matches.size());
  const int d = 8;
  ConstraintSet cs;
  cs.c.setZero(4 * n, d + 1);
  cs.b.resize(4 * n);
  cs.groups.resize(n);
  int row = 0;
  for (int j = 0; j < n; ++j) {
    const double ux = matches[j].p1.x(), uy = matches[j].p1.y();
    const double vx = matches[j].p2.x(), vy = matches[j].p2.y();
    Eigen::VectorXd g1 = Eigen::VectorXd::Zero(d);
    g1 << ux, uy, 1.0, 0.0, 0.0, 0.0, -vx * ux, -vx * uy;
    Eigen::VectorXd g2 = Eigen::VectorXd::Zero(d);
    g2 << 0.0, 0.0, 0.0, ux, uy, 1.0, -vy * ux, -vy * uy;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(d);
    r(6) = ux;
    r(7) = uy;
    cs.groups[j] = {row, row + 1, row + 2, row + 3};
    detail::append_fractional_rows(g1, -vx, g2, -vy, r, 1.0, eps, cs.c, cs.b,
                                   row);
  }
  check_consistent(cs);
  return cs;
}

/// Affine map sending p2 to p1 (six parameters, row-major); one-norm
/// prediction error in the first image, constant unit denominator.
inline ConstraintSet affinity_constraints(const std::vector<Match>& matches,
                                          double eps) {
  detail::require_positive_eps(eps, "affinity_constraints");
  if (matches.empty()) {
    throw std::invalid_argument("affinity_constraints: no matches");
  }
  const int n = static_cast<int>(matches.size());
  const int d = 6;
  ConstraintSet cs;
  cs.c.setZero(4 * n, d + 1);
  cs.b.resize(4 * n);
  cs.groups.resize(n);
  int row = 0;
  const Eigen::VectorXd r = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < n; ++j) {
    const double ux = matches[j].p1.x(), uy = matches[j].p1.y();
    const double vx = matches[j].p2.x(), vy = matches[j].p2.y();
    Eigen::VectorXd g1 = Eigen::VectorXd::Zero(d);
    g1 << vx, vy, 1.0, 0.0, 0.0, 0.0;
    Eigen::VectorXd g2 = Eigen::VectorXd::Zero(d);
    g2 << 0.0, 0.0, 0.0, vx, vy, 1.0;
    cs.groups[j] = {row, row + 1, row + 2, row + 3};
    detail::append_fractional_rows(g1, -ux, g2, -uy, r, 1.0, eps, cs.c, cs.b,
                                   row);
  }
  check_consistent(cs);
  return cs;
}

/// Scene point from calibrated views; the residual is the one-norm
/// reprojection error per view, each view contributing one datum.
inline ConstraintSet triangulation_constraints(
    const std::vector<CameraView>& views, double eps) {
  detail::require_positive_eps(eps, "triangulation_constraints");
  if (views.empty()) {
    throw std::invalid_argument("triangulation_constraints: no views");
  }
  const int n = static_cast<int>(views.size());
  const int d = 3;
  ConstraintSet cs;
  cs.c.setZero(4 * n, d + 1);
  cs.b.resize(4 * n);
  cs.groups.resize(n);
  int row = 0;
  for (int j = 0; j < n; ++j) {
    const auto& p = views[j].p;
    const double x1 = views[j].obs.x(), x2 = views[j].obs.y();
    const Eigen::VectorXd g1 =
        (p.row(0).head(3) - x1 * p.row(2).head(3)).transpose();
    const Eigen::VectorXd g2 =
        (p.row(1).head(3) - x2 * p.row(2).head(3)).transpose();
    const double h1 = p(0, 3) - x1 * p(2, 3);
    const double h2 = p(1, 3) - x2 * p(2, 3);
    const Eigen::VectorXd r = p.row(2).head(3).transpose();
    const double q = p(2, 3);
    cs.groups[j] = {row, row + 1, row + 2, row + 3};
    detail::append_fractional_rows(g1, h1, g2, h2, r, q, eps, cs.c, cs.b, row);
  }
  check_consistent(cs);
  return cs;
}

// ---------------------------------------------------------------------------
// Algebraic linearizations.

/// Isotropic normalization: centroid to the origin, mean distance sqrt(2).
inline Eigen::Matrix3d normalize_points(const std::vector<Eigen::Vector2d>& pts,
                                        std::vector<Eigen::Vector2d>* out) {
  if (pts.empty()) throw std::invalid_argument("normalize_points: no points");
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  if (mean_dist < 1e-12) {
    throw std::invalid_argument("normalize_points: coincident points");
  }
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0.0, -s * centroid.x(), 0.0, s, -s * centroid.y(), 0.0, 0.0, 1.0;
  if (out) {
    out->resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      (*out)[i] = s * (pts[i] - centroid);
    }
  }
  return t;
}

struct Linearization {
  RegressionDataset data;
  Eigen::Matrix3d t1 = Eigen::Matrix3d::Identity();  // first-image transform
  Eigen::Matrix3d t2 = Eigen::Matrix3d::Identity();  // second-image transform
  int rows_per_match = 1;
  std::vector<std::string> warnings;
};

/// Epipolar constraint with the bottom-right matrix entry fixed at one:
/// after normalization of both images, each match gives one equation
/// x^T theta = -1 over the remaining eight entries (row-major). Matches
/// whose feature row vanishes are dropped with a warning.
inline Linearization fundamental_linearization(const std::vector<Match>& matches) {
  if (matches.size() < 8) {
    throw std::invalid_argument(
        "fundamental_linearization: at least 8 matches required");
  }
  std::vector<Eigen::Vector2d> pts1(matches.size()), pts2(matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    pts1[i] = matches[i].p1;
    pts2[i] = matches[i].p2;
  }
  std::vector<Eigen::Vector2d> n1, n2;
  Linearization lin;
  lin.t1 = normalize_points(pts1, &n1);
  lin.t2 = normalize_points(pts2, &n2);

  std::vector<Eigen::Matrix<double, 8, 1>> rows;
  rows.reserve(matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const double u1 = n1[i].x(), u2 = n1[i].y();
    const double w1 = n2[i].x(), w2 = n2[i].y();
    Eigen::Matrix<double, 8, 1> x;
    x << w1 * u1, w1 * u2, w1, w2 * u1, w2 * u2, w2, u1, u2;
    if (x.norm() < 1e-14) {
      lin.warnings.push_back("dropped match " + std::to_string(i) +
                             ": zero feature row");
      continue;
    }
    rows.push_back(x);
  }
  if (rows.size() < 8) {
    throw std::invalid_argument(
        "fundamental_linearization: fewer than 8 usable matches");
  }
  lin.data.x.resize(static_cast<int>(rows.size()), 8);
  lin.data.y = Eigen::VectorXd::Constant(static_cast<int>(rows.size()), -1.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    lin.data.x.row(static_cast<int>(i)) = rows[i].transpose();
  }
  lin.rows_per_match = 1;
  return lin;
}

inline Eigen::Matrix3d fundamental_from_theta(const Eigen::VectorXd& theta,
                                              const Eigen::Matrix3d& t1,
                                              const Eigen::Matrix3d& t2) {
  if (theta.size() != 8) {
    throw std::invalid_argument("fundamental_from_theta: need 8 parameters");
  }
  Eigen::Matrix3d f;
  f << theta(0), theta(1), theta(2), theta(3), theta(4), theta(5), theta(6),
      theta(7), 1.0;
  return t2.transpose() * f * t1;
}

/// Direct linear transform for a homography mapping image 1 to image 2 with
/// the bottom-right entry fixed at one; two equations per match after
/// normalizing both images.
inline Linearization homography_linearization(const std::vector<Match>& matches) {
  if (matches.size() < 4) {
    throw std::invalid_argument(
        "homography_linearization: at least 4 matches required");
  }
  std::vector<Eigen::Vector2d> pts1(matches.size()), pts2(matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    pts1[i] = matches[i].p1;
    pts2[i] = matches[i].p2;
  }
  std::vector<Eigen::Vector2d> n1, n2;
  Linearization lin;
  lin.t1 = normalize_points(pts1, &n1);
  lin.t2 = normalize_points(pts2, &n2);

  const int n = static_cast<int>(matches.size());
  lin.data.x.resize(2 * n, 8);
  lin.data.y.resize(2 * n);
  for (int i = 0; i < n; ++i) {
    const double ux = n1[static_cast<std::size_t>(i)].x();
    const double uy = n1[static_cast<std::size_t>(i)].y();
    const double vx = n2[static_cast<std::size_t>(i)].x();
    const double vy = n2[static_cast<std::size_t>(i)].y();
    lin.data.x.row(2 * i) << ux, uy, 1.0, 0.0, 0.0, 0.0, -vx * ux, -vx * uy;
    lin.data.y(2 * i) = vx;
    lin.data.x.row(2 * i + 1) << 0.0, 0.0, 0.0, ux, uy, 1.0, -vy * ux,
        -vy * uy;
    lin.data.y(2 * i + 1) = vy;
  }
  lin.rows_per_match = 2;
  return lin;
}

inline Eigen::Matrix3d homography_from_theta(const Eigen::VectorXd& theta,
                                             const Eigen::Matrix3d& t1,
                                             const Eigen::Matrix3d& t2) {
  if (theta.size() != 8) {
    throw std::invalid_argument("homography_from_theta: need 8 parameters");
  }
  Eigen::Matrix3d h;
  h << theta(0), theta(1), theta(2), theta(3), theta(4), theta(5), theta(6),
      theta(7), 1.0;
  return t2.inverse() * h * t1;
}

/// Interval constraints for a linearization, grouped so that one match is
/// one datum even when it contributes several equations: a match is an
/// inlier only if every one of its equations holds within eps.
inline ConstraintSet grouped_linear_constraints(const Linearization& lin,
                                                double eps) {
  ConstraintSet cs = linear_constraints(lin.data, eps);
  if (lin.rows_per_match <= 1) return cs;
  const int k = lin.rows_per_match;
  const int n = lin.data.n() / k;
  std::vector<std::vector<int>> merged(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < k; ++t) {
      const auto& g = cs.groups[static_cast<std::size_t>(j * k + t)];
      merged[static_cast<std::size_t>(j)].insert(
          merged[static_cast<std::size_t>(j)].end(), g.begin(), g.end());
    }
  }
  cs.groups = std::move(merged);
  check_consistent(cs);
  return cs;
}

}  // namespace maxcon
