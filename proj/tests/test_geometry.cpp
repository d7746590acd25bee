// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.

#include "maxcon/geometry.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "maxcon/core.hpp"
#include "maxcon/rng.hpp"

namespace {

using maxcon::CameraView;
using maxcon::ConstraintSet;
using maxcon::Match;
using maxcon::Rng;

Eigen::Vector2d apply_homography(const Eigen::Matrix3d& h,
                                 const Eigen::Vector2d& u) {
  const Eigen::Vector3d w = h * u.homogeneous();
  return w.hnormalized();
}

// Random well-conditioned homography with unit bottom-right entry.
Eigen::Matrix3d random_homography(Rng& rng) {
  Eigen::Matrix3d h;
  for (;;) {
    h << 1.0 + rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
        rng.uniform(-0.5, 0.5), rng.uniform(-0.2, 0.2),
        1.0 + rng.uniform(-0.2, 0.2), rng.uniform(-0.5, 0.5),
        rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), 1.0;
    if (std::abs(h.determinant()) > 0.1) return h;
  }
}

TEST(Homography, MaskMatchesDirectFractionalEvaluation) {
  Rng rng(101);
  const Eigen::Matrix3d h = random_homography(rng);
  Eigen::VectorXd theta(8);
  theta << h(0, 0), h(0, 1), h(0, 2), h(1, 0), h(1, 1), h(1, 2), h(2, 0),
      h(2, 1);
  const double eps = 0.05;

  std::vector<Match> matches;
  std::vector<bool> expect_inlier;
  for (int j = 0; j < 40; ++j) {
    Match m;
    m.p1 = Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const Eigen::Vector2d exact = apply_homography(h, m.p1);
    // Perturb the second point by a one-norm transfer-error budget: tau < 1
    // keeps the match an inlier, tau > 1 pushes it out.
    const double tau = (j % 2 == 0) ? 0.5 : 1.5;
    const double budget = tau * eps;
    const double split = rng.uniform(0.1, 0.9);
    const double sx = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    const double sy = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    m.p2 = exact + Eigen::Vector2d(sx * split * budget,
                                   sy * (1.0 - split) * budget);
    matches.push_back(m);
    expect_inlier.push_back(tau < 1.0);
  }

  const ConstraintSet cs = maxcon::homography_constraints(matches, eps);
  EXPECT_EQ(cs.rows(), 4 * 40);
  EXPECT_EQ(cs.num_data(), 40);
  EXPECT_EQ(cs.dim(), 8);
  const maxcon::ConsensusResult cons = maxcon::consensus(theta, cs);
  for (int j = 0; j < 40; ++j) {
    EXPECT_EQ(cons.mask[static_cast<std::size_t>(j)] != 0,
              expect_inlier[static_cast<std::size_t>(j)])
        << "match " << j;
  }
}

TEST(Affinity, MaskMatchesDirectEvaluation) {
  Rng rng(103);
  Eigen::VectorXd theta(6);
  for (int k = 0; k < 6; ++k) theta(k) = rng.uniform(-1.0, 1.0);
  const double eps = 0.1;

  std::vector<Match> matches;
  std::vector<bool> expect_inlier;
  for (int j = 0; j < 30; ++j) {
    Match m;
    m.p2 = Eigen::Vector2d(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    // The affine map sends the second point to the first.
    const Eigen::Vector2d exact(
        theta(0) * m.p2.x() + theta(1) * m.p2.y() + theta(2),
        theta(3) * m.p2.x() + theta(4) * m.p2.y() + theta(5));
    const double tau = (j % 3 == 0) ? 1.5 : 0.5;
    const double split = rng.uniform(0.1, 0.9);
    m.p1 = exact + Eigen::Vector2d(split * tau * eps,
                                   -(1.0 - split) * tau * eps);
    matches.push_back(m);
    expect_inlier.push_back(tau < 1.0);
  }

  const ConstraintSet cs = maxcon::affinity_constraints(matches, eps);
  EXPECT_EQ(cs.dim(), 6);
  const maxcon::ConsensusResult cons = maxcon::consensus(theta, cs);
  for (int j = 0; j < 30; ++j) {
    EXPECT_EQ(cons.mask[static_cast<std::size_t>(j)] != 0,
              expect_inlier[static_cast<std::size_t>(j)])
        << "match " << j;
  }
}

TEST(Triangulation, MaskMatchesReprojectionAndDepthSign) {
  Rng rng(107);
  const Eigen::Vector3d x(0.3, -0.2, 3.0);
  const double eps = 0.02;

  std::vector<CameraView> views;
  std::vector<bool> expect_inlier;
  for (int k = 0; k < 12; ++k) {
    CameraView v;
    const double ang = rng.uniform(-0.3, 0.3);
    Eigen::Matrix3d r;
    r << std::cos(ang), 0.0, std::sin(ang), 0.0, 1.0, 0.0, -std::sin(ang),
        0.0, std::cos(ang);
    v.p.leftCols<3>() = r;
    v.p.col(3) = Eigen::Vector3d(rng.uniform(-0.5, 0.5),
                                 rng.uniform(-0.5, 0.5), 0.0);
    const Eigen::Vector3d proj = v.p * x.homogeneous();
    ASSERT_GT(proj.z(), 0.0);
    const double tau = (k % 2 == 0) ? 0.4 : 1.6;
    const double split = rng.uniform(0.2, 0.8);
    v.obs = proj.hnormalized() +
            Eigen::Vector2d(split * tau * eps, (1.0 - split) * tau * eps);
    views.push_back(v);
    expect_inlier.push_back(tau < 1.0);
  }
  // A sign-flipped camera projects to the same pixel but reverses the depth
  // sign; the constraint rows must reject it regardless of pixel residual.
  CameraView flipped = views[0];
  flipped.p = -flipped.p;
  views.push_back(flipped);
  expect_inlier.push_back(false);

  const ConstraintSet cs = maxcon::triangulation_constraints(views, eps);
  EXPECT_EQ(cs.dim(), 3);
  const maxcon::ConsensusResult cons = maxcon::consensus(x, cs);
  for (std::size_t k = 0; k < views.size(); ++k) {
    EXPECT_EQ(cons.mask[k] != 0, expect_inlier[k]) << "view " << k;
  }
}

TEST(NormalizePoints, CentroidAndScaleContract) {
  Rng rng(109);
  std::vector<Eigen::Vector2d> pts;
  for (int j = 0; j < 25; ++j) {
    pts.emplace_back(rng.uniform(-3.0, 7.0), rng.uniform(2.0, 5.0));
  }
  std::vector<Eigen::Vector2d> out;
  const Eigen::Matrix3d t = maxcon::normalize_points(pts, &out);
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  double mean_dist = 0.0;
  for (const auto& p : out) centroid += p;
  centroid /= 25.0;
  for (const auto& p : out) mean_dist += p.norm();
  mean_dist /= 25.0;
  EXPECT_LE(centroid.lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_NEAR(mean_dist, std::sqrt(2.0), 1e-12);
  // The matrix reproduces the transformed points.
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const Eigen::Vector2d mapped = (t * pts[j].homogeneous()).hnormalized();
    EXPECT_LE((mapped - out[j]).lpNorm<Eigen::Infinity>(), 1e-12);
  }

  const std::vector<Eigen::Vector2d> same(10, Eigen::Vector2d(1.0, 2.0));
  EXPECT_THROW(maxcon::normalize_points(same, nullptr), std::invalid_argument);
}

// Matches consistent with a fundamental matrix built from two camera poses.
std::vector<Match> epipolar_matches(Rng& rng, const Eigen::Matrix3d& f,
                                    int count) {
  std::vector<Match> matches;
  while (static_cast<int>(matches.size()) < count) {
    const Eigen::Vector3d u(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                            1.0);
    const Eigen::Vector3d line = f * u;  // epipolar line in image 2
    if (std::abs(line.y()) < 0.2) continue;
    const double vx = rng.uniform(-1.0, 1.0);
    const double vy = -(line.x() * vx + line.z()) / line.y();
    if (std::abs(vy) > 3.0) continue;
    Match m;
    m.p1 = u.head<2>();
    m.p2 = Eigen::Vector2d(vx, vy);
    matches.push_back(m);
  }
  return matches;
}

TEST(Fundamental, LinearizationExactOnConsistentMatches) {
  Rng rng(113);
  // F from a translated, slightly rotated second camera; guaranteed rank 2.
  Eigen::Matrix3d r;
  const double ang = 0.1;
  r << std::cos(ang), -std::sin(ang), 0.0, std::sin(ang), std::cos(ang), 0.0,
      0.0, 0.0, 1.0;
  const Eigen::Vector3d t(1.0, 0.2, 0.1);
  Eigen::Matrix3d tx;
  tx << 0.0, -t.z(), t.y(), t.z(), 0.0, -t.x(), -t.y(), t.x(), 0.0;
  const Eigen::Matrix3d f = tx * r;

  const std::vector<Match> matches = epipolar_matches(rng, f, 30);
  const maxcon::Linearization lin = maxcon::fundamental_linearization(matches);
  EXPECT_EQ(lin.data.n(), 30);
  EXPECT_EQ(lin.data.d(), 8);
  EXPECT_EQ(lin.rows_per_match, 1);
  EXPECT_TRUE((lin.data.y.array() == -1.0).all());

  // The normalized matrix, scaled to unit bottom-right entry, satisfies
  // every linearized equation exactly.
  Eigen::Matrix3d fn = lin.t2.inverse().transpose() * f * lin.t1.inverse();
  ASSERT_GT(std::abs(fn(2, 2)), 1e-8);
  fn /= fn(2, 2);
  Eigen::VectorXd theta(8);
  theta << fn(0, 0), fn(0, 1), fn(0, 2), fn(1, 0), fn(1, 1), fn(1, 2),
      fn(2, 0), fn(2, 1);
  const Eigen::VectorXd resid = lin.data.x * theta - lin.data.y;
  EXPECT_LE(resid.lpNorm<Eigen::Infinity>(), 1e-9);

  // Denormalization returns the original matrix up to scale.
  const Eigen::Matrix3d back = maxcon::fundamental_from_theta(theta, lin.t1,
                                                              lin.t2);
  const Eigen::Matrix3d a = back / back.norm();
  const Eigen::Matrix3d b = f / f.norm();
  const double sign = (a.cwiseProduct(b).sum() >= 0.0) ? 1.0 : -1.0;
  EXPECT_LE((a - sign * b).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Fundamental, DropsZeroFeatureRowsWithWarning) {
  // Symmetric points keep both centroids at the origin, so the origin-to-
  // origin match normalizes to a zero feature row.
  std::vector<Match> matches;
  const double c[8][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1},
                          {1, 1},  {-1, -1}, {1, -1}, {-1, 1}};
  for (const auto& p : c) {
    Match m;
    m.p1 = Eigen::Vector2d(p[0], p[1]);
    m.p2 = Eigen::Vector2d(0.7 * p[0], 0.7 * p[1]);
    matches.push_back(m);
  }
  Match zero;
  zero.p1.setZero();
  zero.p2.setZero();
  matches.push_back(zero);

  const maxcon::Linearization lin = maxcon::fundamental_linearization(matches);
  EXPECT_EQ(lin.data.n(), 8);
  ASSERT_EQ(lin.warnings.size(), 1u);
  EXPECT_NE(lin.warnings.front().find("zero feature row"), std::string::npos);
}

TEST(Fundamental, ThrowsBelowMinimumMatches) {
  std::vector<Match> few(7);
  for (int j = 0; j < 7; ++j) {
    few[static_cast<std::size_t>(j)].p1 = Eigen::Vector2d(j, j % 3);
    few[static_cast<std::size_t>(j)].p2 = Eigen::Vector2d(j % 2, j);
  }
  EXPECT_THROW(maxcon::fundamental_linearization(few), std::invalid_argument);
}

TEST(HomographyDlt, ExactOnNoiselessMatchesAndRecovers) {
  Rng rng(127);
  const Eigen::Matrix3d h = random_homography(rng);
  std::vector<Match> matches;
  for (int j = 0; j < 12; ++j) {
    Match m;
    m.p1 = Eigen::Vector2d(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5));
    m.p2 = apply_homography(h, m.p1);
    matches.push_back(m);
  }
  const maxcon::Linearization lin = maxcon::homography_linearization(matches);
  EXPECT_EQ(lin.data.n(), 24);
  EXPECT_EQ(lin.rows_per_match, 2);

  Eigen::Matrix3d hn = lin.t2 * h * lin.t1.inverse();
  ASSERT_GT(std::abs(hn(2, 2)), 1e-8);
  hn /= hn(2, 2);
  Eigen::VectorXd theta(8);
  theta << hn(0, 0), hn(0, 1), hn(0, 2), hn(1, 0), hn(1, 1), hn(1, 2),
      hn(2, 0), hn(2, 1);
  const Eigen::VectorXd resid = lin.data.x * theta - lin.data.y;
  EXPECT_LE(resid.lpNorm<Eigen::Infinity>(), 1e-9);

  const Eigen::Matrix3d back =
      maxcon::homography_from_theta(theta, lin.t1, lin.t2);
  const Eigen::Matrix3d scaled = back / back(2, 2);
  EXPECT_LE((scaled - h / h(2, 2)).cwiseAbs().maxCoeff(), 1e-8);

  // Grouped interval constraints treat each match as one datum of four rows.
  const ConstraintSet cs = maxcon::grouped_linear_constraints(lin, 0.01);
  EXPECT_EQ(cs.num_data(), 12);
  for (const auto& g : cs.groups) EXPECT_EQ(g.size(), 4u);
  EXPECT_EQ(maxcon::consensus(theta, cs).count, 12);
}

TEST(HomographyDlt, ThrowsBelowMinimumMatches) {
  std::vector<Match> few(3);
  for (int j = 0; j < 3; ++j) {
    few[static_cast<std::size_t>(j)].p1 = Eigen::Vector2d(j, 1 - j);
    few[static_cast<std::size_t>(j)].p2 = Eigen::Vector2d(2 * j, j);
  }
  EXPECT_THROW(maxcon::homography_linearization(few), std::invalid_argument);
}

TEST(FrontEnds, RejectBadEpsilonAndEmptyInput) {
  std::vector<Match> one(1);
  one[0].p1 = Eigen::Vector2d(0, 0);
  one[0].p2 = Eigen::Vector2d(1, 1);
  EXPECT_THROW(maxcon::homography_constraints(one, 0.0), std::invalid_argument);
  EXPECT_THROW(maxcon::affinity_constraints({}, 0.1), std::invalid_argument);
  EXPECT_THROW(maxcon::triangulation_constraints({}, 0.1),
               std::invalid_argument);
}

}  // namespace
