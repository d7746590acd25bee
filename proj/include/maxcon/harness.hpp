// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.
//
// Experiment orchestration: named problems, named methods, named parameter
// profiles, seeded runs, and CSV/JSON reporting.
//
// Methods are addressed by strings:
//   lsq, rs, lors, lors1, l1, linf      -- baselines (lors1 = gated variant)
//   ep-rs, ep-lsq, ep-linf              -- penalty refiner over an initializer
//   am-rs, am-lsq, am-linf              -- splitting refiner over an initializer
// "ep" and "am" alone default to the rs initializer. A method is randomized
// when it samples minimal subsets anywhere in its chain; randomized methods
// are run `runs_randomized` times (10 by default), deterministic ones once.
//
// Per-run seeds derive from the master seed and the method name, so adding a
// method never shifts another method's draws. Consensus is always recounted
// from the returned parameters; wall time covers the whole chain including
// the initializer.

#pragma once

#include <json.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "maxcon/admm.hpp"
#include "maxcon/baselines.hpp"
#include "maxcon/core.hpp"
#include "maxcon/geometry.hpp"
#include "maxcon/io.hpp"
#include "maxcon/penalty.hpp"
#include "maxcon/reformulate.hpp"
#include "maxcon/rng.hpp"
#include "maxcon/synth.hpp"
#include "maxcon/types.hpp"

namespace maxcon {

inline constexpr const char* kReportVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Parameter profiles: one per experiment family.

struct Profile {
  std::string name = "linear";
  double alpha0 = 0.5;  // penalty refiner start weight
  double kappa = 5.0;   // penalty weight growth
  double rho0 = 0.1;    // splitting refiner start weight
  double sigma = 2.5;   // splitting weight growth
  double epsilon = 0.1; // default inlier threshold for the family
};

inline std::vector<Profile> builtin_profiles() {
  return {
      {"linear", 0.5, 5.0, 0.1, 2.5, 0.1},
      {"fundamental-algebraic", 0.5, 5.0, 0.1, 2.5, 1.0},
      {"homography-algebraic", 0.5, 5.0, 0.1, 2.5, 4.0},
      {"homography-geometric", 10.0, 1.5, 0.1, 1.5, 4.0},
      {"affinity", 0.5, 5.0, 0.5, 2.5, 2.0},
      {"triangulation", 0.5, 1.5, 0.1, 2.5, 1.0},
  };
}

inline Profile profile_by_name(const std::string& name) {
  for (const Profile& p : builtin_profiles()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const Profile& p : builtin_profiles()) {
    known += (known.empty() ? "" : ", ") + p.name;
  }
  throw std::invalid_argument("unknown profile '" + name + "' (known: " + known + ")");
}

// ---------------------------------------------------------------------------
// Problems: a constraint set plus whatever a sampling method needs.

struct Problem {
  ConstraintSet cs;
  RegressionDataset data;  // point residual rows, when the family has them
  bool has_data = false;
  double epsilon = 0.1;
  int subset_size = 0;     // data per minimal sample
  MinimalSolver minimal;   // hypothesis generator over datum indices
  std::string kind = "linear";

  int num_data() const { return cs.num_data(); }
};

namespace detail {

// d linear rows per datum index set -> exact solve (empty when degenerate).
// Captures its inputs by value so the solver outlives any reshuffled Problem.
inline MinimalSolver owned_linear_minimal(RegressionDataset data,
                                          int rows_per_datum) {
  return [data = std::move(data), rows_per_datum](const std::vector<int>& idx) {
    const int d = data.d();
    Eigen::MatrixXd x(d, d);
    Eigen::VectorXd y(d);
    int r = 0;
    for (int j : idx) {
      for (int t = 0; t < rows_per_datum && r < d; ++t, ++r) {
        x.row(r) = data.x.row(j * rows_per_datum + t);
        y(r) = data.y(j * rows_per_datum + t);
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0 || smax / smin > 1e10) return std::vector<Eigen::VectorXd>{};
    return std::vector<Eigen::VectorXd>{svd.solve(y)};
  };
}

// Four matches -> the eight projective parameters (last entry pinned to 1).
inline MinimalSolver homography_minimal(std::vector<Match> matches) {
  return [matches = std::move(matches)](const std::vector<int>& idx) {
    Eigen::MatrixXd a(8, 8);
    Eigen::VectorXd rhs(8);
    for (int i = 0; i < 4; ++i) {
      const Match& m = matches[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      const double u = m.p1.x(), v = m.p1.y();
      const double up = m.p2.x(), vp = m.p2.y();
      a.row(2 * i) << u, v, 1, 0, 0, 0, -up * u, -up * v;
      rhs(2 * i) = up;
      a.row(2 * i + 1) << 0, 0, 0, u, v, 1, -vp * u, -vp * v;
      rhs(2 * i + 1) = vp;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0 || smax / smin > 1e10) return std::vector<Eigen::VectorXd>{};
    return std::vector<Eigen::VectorXd>{svd.solve(rhs)};
  };
}

// Three matches -> the six affine parameters (second image to first).
inline MinimalSolver affinity_minimal(std::vector<Match> matches) {
  return [matches = std::move(matches)](const std::vector<int>& idx) {
    Eigen::MatrixXd a(6, 6);
    Eigen::VectorXd rhs(6);
    for (int i = 0; i < 3; ++i) {
      const Match& m = matches[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      a.row(2 * i) << m.p2.x(), m.p2.y(), 1, 0, 0, 0;
      rhs(2 * i) = m.p1.x();
      a.row(2 * i + 1) << 0, 0, 0, m.p2.x(), m.p2.y(), 1;
      rhs(2 * i + 1) = m.p1.y();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0 || smax / smin > 1e10) return std::vector<Eigen::VectorXd>{};
    return std::vector<Eigen::VectorXd>{svd.solve(rhs)};
  };
}

// Two views -> one space point by the homogeneous direct linear transform.
inline MinimalSolver triangulation_minimal(std::vector<CameraView> views) {
  return [views = std::move(views)](const std::vector<int>& idx) {
    Eigen::MatrixXd a(2 * static_cast<int>(idx.size()), 4);
    int r = 0;
    for (int i : idx) {
      const CameraView& view = views[static_cast<std::size_t>(i)];
      a.row(r++) = view.obs.x() * view.p.row(2) - view.p.row(0);
      a.row(r++) = view.obs.y() * view.p.row(2) - view.p.row(1);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    Eigen::Vector4d xh = svd.matrixV().col(3);
    if (std::abs(xh(3)) < 1e-12) return std::vector<Eigen::VectorXd>{};
    return std::vector<Eigen::VectorXd>{Eigen::VectorXd(xh.head(3) / xh(3))};
  };
}

}  // namespace detail

inline Problem make_linear_problem(const RegressionDataset& data, double eps) {
  Problem pb;
  pb.cs = linear_constraints(data, eps);
  pb.data = data;
  pb.has_data = true;
  pb.epsilon = eps;
  pb.subset_size = data.d();
  pb.minimal = detail::owned_linear_minimal(data, 1);
  pb.kind = "linear";
  return pb;
}

inline Problem make_fundamental_algebraic_problem(
    const std::vector<Match>& matches, double eps) {
  const Linearization lin = fundamental_linearization(matches);
  Problem pb;
  pb.cs = grouped_linear_constraints(lin, eps);
  pb.data = lin.data;
  pb.has_data = true;
  pb.epsilon = eps;
  pb.subset_size = 8;
  pb.minimal = detail::owned_linear_minimal(lin.data, lin.rows_per_match);
  pb.kind = "fundamental-algebraic";
  return pb;
}

inline Problem make_homography_algebraic_problem(
    const std::vector<Match>& matches, double eps) {
  const Linearization lin = homography_linearization(matches);
  Problem pb;
  pb.cs = grouped_linear_constraints(lin, eps);
  pb.data = lin.data;
  pb.has_data = true;
  pb.epsilon = eps;
  pb.subset_size = 4;  // two rows per match, eight unknowns
  pb.minimal = detail::owned_linear_minimal(lin.data, lin.rows_per_match);
  pb.kind = "homography-algebraic";
  return pb;
}

inline Problem make_homography_problem(const std::vector<Match>& matches,
                                       double eps) {
  Problem pb;
  pb.cs = homography_constraints(matches, eps);
  pb.epsilon = eps;
  pb.subset_size = 4;
  pb.minimal = detail::homography_minimal(matches);
  pb.kind = "homography-geometric";
  return pb;
}

inline Problem make_affinity_problem(const std::vector<Match>& matches,
                                     double eps) {
  Problem pb;
  pb.cs = affinity_constraints(matches, eps);
  pb.epsilon = eps;
  pb.subset_size = 3;
  pb.minimal = detail::affinity_minimal(matches);
  pb.kind = "affinity";
  return pb;
}

inline Problem make_triangulation_problem(const std::vector<CameraView>& views,
                                          double eps) {
  Problem pb;
  pb.cs = triangulation_constraints(views, eps);
  pb.epsilon = eps;
  pb.subset_size = 2;
  pb.minimal = detail::triangulation_minimal(views);
  pb.kind = "triangulation";
  return pb;
}

// ---------------------------------------------------------------------------
// Method naming.

struct MethodSpec {
  std::string base;  // lsq | rs | lors | lors1 | l1 | linf | ep | am
  std::string init;  // rs | lsq | linf (refiners only)
};

inline MethodSpec parse_method(const std::string& name) {
  const auto dash = name.find('-');
  const std::string base = dash == std::string::npos ? name : name.substr(0, dash);
  std::string init = dash == std::string::npos ? "" : name.substr(dash + 1);
  const bool refiner = base == "ep" || base == "am";
  if (refiner) {
    if (init.empty()) init = "rs";
    if (init != "rs" && init != "lsq" && init != "linf") {
      throw std::invalid_argument("unknown initializer '" + init + "' in method '" +
                                  name + "' (use rs, lsq, or linf)");
    }
    return {base, init};
  }
  if (!init.empty() || (base != "lsq" && base != "rs" && base != "lors" &&
                        base != "lors1" && base != "l1" && base != "linf")) {
    throw std::invalid_argument(
        "unknown method '" + name +
        "' (use lsq, rs, lors, lors1, l1, linf, ep[-init], am[-init])");
  }
  return {base, ""};
}

inline std::string canonical_method_name(const MethodSpec& m) {
  return m.init.empty() ? m.base : m.base + "-" + m.init;
}

inline bool method_is_randomized(const MethodSpec& m) {
  return m.base == "rs" || m.base == "lors" || m.base == "lors1" ||
         m.init == "rs";
}

// ---------------------------------------------------------------------------
// Running one method once.

namespace detail {

inline FitResult run_initializer(const Problem& pb, const std::string& init,
                                 std::uint64_t seed) {
  if (init == "lsq") {
    if (!pb.has_data) {
      throw std::invalid_argument("initializer 'lsq' needs point residual data");
    }
    return lsq_fit(pb.data, pb.cs);
  }
  if (init == "linf") return linf_fit(pb.cs);
  RansacConfig rc;
  rc.seed = seed;
  return sampling_fit(pb.num_data(), pb.subset_size, pb.minimal, pb.cs, rc);
}

}  // namespace detail

// Runs one named method once with the given seed. Consensus in the result is
// recounted from the returned parameters; wall_time spans the whole call.
inline FitResult run_method(const Problem& pb, const std::string& name,
                            const Profile& prof, std::uint64_t seed) {
  const MethodSpec m = parse_method(name);
  const auto t0 = std::chrono::steady_clock::now();
  FitResult fit;
  if (m.base == "lsq") {
    if (!pb.has_data) {
      throw std::invalid_argument("method 'lsq' needs point residual data");
    }
    fit = lsq_fit(pb.data, pb.cs);
  } else if (m.base == "rs") {
    RansacConfig rc;
    rc.seed = seed;
    fit = sampling_fit(pb.num_data(), pb.subset_size, pb.minimal, pb.cs, rc);
  } else if (m.base == "lors" || m.base == "lors1") {
    if (!pb.has_data || pb.data.n() != pb.num_data()) {
      throw std::invalid_argument("method '" + m.base +
                                  "' needs one point residual row per datum");
    }
    RansacConfig rc;
    rc.seed = seed;
    fit = lo_ransac_fit(pb.data, pb.cs, rc, m.base == "lors1");
  } else if (m.base == "l1") {
    fit = l1_fit(pb.cs);
  } else if (m.base == "linf") {
    fit = linf_fit(pb.cs);
  } else {
    const FitResult start = detail::run_initializer(pb, m.init, seed);
    if (m.base == "ep") {
      PenaltyConfig pc;
      pc.alpha0 = prof.alpha0;
      pc.kappa = prof.kappa;
      fit = ep_solve(pb.cs, start.theta, pc).fit;
    } else {
      AdmmConfig ac;
      ac.rho0 = prof.rho0;
      ac.sigma = prof.sigma;
      fit = am_solve(pb.cs, start.theta, ac).fit;
    }
    fit.warnings.insert(fit.warnings.begin(), start.warnings.begin(),
                        start.warnings.end());
    fit.tainted = fit.tainted || start.tainted;
  }
  const ConsensusResult cons = consensus(fit.theta, pb.cs);
  fit.consensus = cons.count;
  fit.inlier_mask = cons.mask;
  fit.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  return fit;
}

// ---------------------------------------------------------------------------
// Experiments and reports.

struct RunRecord {
  std::string method;
  int run = 0;
  std::uint64_t seed = 0;
  int consensus = 0;
  double time_s = 0.0;
  bool converged = true;
  bool tainted = false;
};

struct MethodSummary {
  std::string method;
  double mean_consensus = 0.0;
  double mean_time_s = 0.0;
  std::vector<RunRecord> runs;
};

struct ExperimentReport {
  std::string version = kReportVersion;
  std::uint64_t master_seed = 0;
  std::vector<std::pair<std::string, std::string>> config;  // echoed, ordered
  std::vector<MethodSummary> methods;

  bool all_converged() const {
    for (const MethodSummary& m : methods) {
      for (const RunRecord& r : m.runs) {
        if (!r.converged) return false;
      }
    }
    return true;
  }
};

struct ExperimentConfig {
  std::vector<std::string> methods;
  Profile profile;
  std::uint64_t master_seed = 0;
  int runs_randomized = 10;  // deterministic methods always run once
};

// Per-run seed: mixes the master seed with the method name and run index so
// each (method, run) cell has an independent, reproducible stream.
inline std::uint64_t run_seed(std::uint64_t master, const std::string& method,
                              int run) {
  return splitmix64(master ^ (fnv1a(method) + static_cast<std::uint64_t>(run)));
}

inline ExperimentReport run_experiment(const Problem& pb,
                                       const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.master_seed = cfg.master_seed;
  report.config.emplace_back("kind", pb.kind);
  report.config.emplace_back("profile", cfg.profile.name);
  {
    std::ostringstream os;
    os << pb.epsilon;
    report.config.emplace_back("epsilon", os.str());
    os.str("");
    os << pb.num_data();
    report.config.emplace_back("num_data", os.str());
  }
  for (const std::string& name : cfg.methods) {
    const MethodSpec spec = parse_method(name);  // validates early
    const std::string canon = canonical_method_name(spec);
    MethodSummary summary;
    summary.method = canon;
    const int runs = method_is_randomized(spec) ? cfg.runs_randomized : 1;
    for (int r = 0; r < runs; ++r) {
      RunRecord rec;
      rec.method = canon;
      rec.run = r;
      rec.seed = run_seed(cfg.master_seed, canon, r);
      const FitResult fit = run_method(pb, canon, cfg.profile, rec.seed);
      rec.consensus = fit.consensus;
      rec.time_s = fit.wall_time;
      rec.converged = fit.converged;
      rec.tainted = fit.tainted;
      summary.mean_consensus += rec.consensus;
      summary.mean_time_s += rec.time_s;
      summary.runs.push_back(std::move(rec));
    }
    if (runs > 0) {
      summary.mean_consensus /= runs;
      summary.mean_time_s /= runs;
    }
    report.methods.push_back(std::move(summary));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization.

inline std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "method,run,seed,consensus,time_s,converged,tainted\n";
  for (const MethodSummary& m : report.methods) {
    for (const RunRecord& r : m.runs) {
      os << r.method << "," << r.run << "," << r.seed << "," << r.consensus
         << "," << detail::format_double(r.time_s) << ","
         << (r.converged ? 1 : 0) << "," << (r.tainted ? 1 : 0) << "\n";
    }
  }
  return os.str();
}

inline nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json doc;
  doc["version"] = report.version;
  doc["master_seed"] = report.master_seed;
  doc["config"] = nlohmann::ordered_json::object();
  for (const auto& kv : report.config) doc["config"][kv.first] = kv.second;
  doc["methods"] = nlohmann::ordered_json::array();
  for (const MethodSummary& m : report.methods) {
    nlohmann::ordered_json jm;
    jm["method"] = m.method;
    jm["mean_consensus"] = m.mean_consensus;
    jm["mean_time_s"] = m.mean_time_s;
    jm["runs"] = nlohmann::ordered_json::array();
    for (const RunRecord& r : m.runs) {
      nlohmann::ordered_json jr;
      jr["run"] = r.run;
      jr["seed"] = r.seed;
      jr["consensus"] = r.consensus;
      jr["time_s"] = r.time_s;
      jr["converged"] = r.converged;
      jr["tainted"] = r.tainted;
      jm["runs"].push_back(std::move(jr));
    }
    doc["methods"].push_back(std::move(jm));
  }
  return doc;
}

// Drops wall-time fields in place (for reproducibility comparisons).
template <typename Json>
inline void scrub_time_fields(Json& j) {
  if (j.is_object()) {
    j.erase("time_s");
    j.erase("mean_time_s");
    for (auto& kv : j.items()) scrub_time_fields(kv.value());
  } else if (j.is_array()) {
    for (auto& v : j) scrub_time_fields(v);
  }
}

inline void save_report_csv(const std::string& path,
                            const ExperimentReport& report) {
  std::ofstream out = detail::open_output(path);
  out << report_to_csv(report);
  if (!out) throw std::runtime_error(path + ": write failed");
}

inline void save_report_json(const std::string& path,
                             const ExperimentReport& report) {
  std::ofstream out = detail::open_output(path);
  out << report_to_json(report).dump(2) << "\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace maxcon
