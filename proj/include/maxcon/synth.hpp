// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.
//
// Synthetic linear regression instances with a controlled outlier fraction.
// Covariates are uniform in [-1,1]^d, responses follow the linear model plus
// Gaussian noise (sigma_in), and a chosen fraction of responses is further
// corrupted by unit-variance Gaussian offsets -- symmetric around the model
// when balanced, forced to the positive side otherwise (the one-sided regime
// is what breaks plain least squares).

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "maxcon/rng.hpp"
#include "maxcon/types.hpp"

namespace maxcon {

struct SynthConfig {
  int n = 100;
  int d = 8;
  double sigma_in = 0.1;          // response noise standard deviation
  double outlier_fraction = 0.4;  // fraction of responses corrupted
  bool balanced = true;           // false: corruption only above the model
  std::uint64_t seed = 0;
  double epsilon = 0.1;           // inlier band half-width carried alongside
};

struct SynthProblem {
  RegressionDataset data;
  Eigen::VectorXd theta_true;
  std::vector<std::uint8_t> is_outlier;
};

inline SynthProblem synth_linear(const SynthConfig& cfg) {
  if (cfg.n <= 0 || cfg.d <= 0) {
    throw std::invalid_argument("synth_linear: n and d must be positive");
  }
  if (cfg.sigma_in <= 0.0) {
    throw std::invalid_argument("synth_linear: sigma_in must be > 0");
  }
  if (cfg.epsilon <= 0.0) {
    throw std::invalid_argument("synth_linear: epsilon must be > 0");
  }
  if (cfg.outlier_fraction < 0.0 || cfg.outlier_fraction > 1.0) {
    throw std::invalid_argument(
        "synth_linear: outlier_fraction must be in [0, 1]");
  }
  Rng rng(cfg.seed);
  SynthProblem out;
  out.theta_true.resize(cfg.d);
  for (int k = 0; k < cfg.d; ++k) {
    out.theta_true(k) = rng.uniform(-1.0, 1.0);
  }
  out.data.x.resize(cfg.n, cfg.d);
  out.data.y.resize(cfg.n);
  for (int j = 0; j < cfg.n; ++j) {
    for (int k = 0; k < cfg.d; ++k) {
      out.data.x(j, k) = rng.uniform(-1.0, 1.0);
    }
    out.data.y(j) = out.data.x.row(j).dot(out.theta_true) +
                    cfg.sigma_in * rng.normal();
  }

  // Corrupt a deterministic random subset of the responses.
  const int n_out = static_cast<int>(std::floor(
      cfg.outlier_fraction * static_cast<double>(cfg.n) + 0.5));
  out.is_outlier.assign(static_cast<std::size_t>(cfg.n), 0);
  const std::vector<int> order = sample_indices(cfg.n, cfg.n, rng);
  for (int i = 0; i < n_out; ++i) {
    const int j = order[static_cast<std::size_t>(i)];
    double offset = rng.normal();  // sigma_out = 1
    if (!cfg.balanced) offset = std::abs(offset);
    out.data.y(j) += offset;
    out.is_outlier[static_cast<std::size_t>(j)] = 1;
  }
  return out;
}

}  // namespace maxcon
