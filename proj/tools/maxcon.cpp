// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.
//
// Command-line front end.
//
//   maxcon synth   write a synthetic linear dataset (CSV)
//   maxcon fit     run one method on one dataset, write a one-method report
//   maxcon bench   run a full experiment described by a preset file
//   maxcon oracle  exhaustively solve a small linear dataset exactly
//
// Exit codes: 0 success, 2 at least one run did not converge (results are
// still written), 1 error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "maxcon/harness.hpp"
#include "maxcon/oracle.hpp"

namespace {

struct ProfileFlags {
  std::string profile;
  double alpha0 = -1.0;  // negative: keep the profile's value
  double kappa = -1.0;
  double rho0 = -1.0;
  double sigma = -1.0;
  double epsilon = -1.0;
};

void add_profile_flags(CLI::App* cmd, ProfileFlags* f) {
  cmd->add_option("--profile", f->profile,
                  "parameter profile (linear, fundamental-algebraic, "
                  "homography-algebraic, homography-geometric, affinity, "
                  "triangulation)");
  cmd->add_option("--alpha0", f->alpha0, "penalty refiner start weight");
  cmd->add_option("--kappa", f->kappa, "penalty weight growth factor");
  cmd->add_option("--rho0", f->rho0, "splitting refiner start weight");
  cmd->add_option("--sigma", f->sigma, "splitting weight growth factor");
  cmd->add_option("--epsilon", f->epsilon, "inlier band half-width");
}

maxcon::Profile resolve_profile(const ProfileFlags& f,
                                const std::string& fallback_name) {
  maxcon::Profile p =
      maxcon::profile_by_name(f.profile.empty() ? fallback_name : f.profile);
  if (f.alpha0 > 0.0) p.alpha0 = f.alpha0;
  if (f.kappa > 0.0) p.kappa = f.kappa;
  if (f.rho0 > 0.0) p.rho0 = f.rho0;
  if (f.sigma > 0.0) p.sigma = f.sigma;
  if (f.epsilon > 0.0) p.epsilon = f.epsilon;
  return p;
}

// Loads a dataset of the given kind and builds the matching problem.
maxcon::Problem load_problem(const std::string& kind, const std::string& path,
                             double eps) {
  if (kind == "linear") {
    return maxcon::make_linear_problem(maxcon::load_linear_dataset(path), eps);
  }
  if (kind == "fundamental-algebraic") {
    return maxcon::make_fundamental_algebraic_problem(maxcon::load_matches(path), eps);
  }
  if (kind == "homography-algebraic") {
    return maxcon::make_homography_algebraic_problem(maxcon::load_matches(path), eps);
  }
  if (kind == "homography-geometric") {
    return maxcon::make_homography_problem(maxcon::load_matches(path), eps);
  }
  if (kind == "affinity") {
    return maxcon::make_affinity_problem(maxcon::load_matches(path), eps);
  }
  if (kind == "triangulation") {
    return maxcon::make_triangulation_problem(maxcon::load_tracks(path), eps);
  }
  throw std::invalid_argument(
      "unknown kind '" + kind +
      "' (use linear, fundamental-algebraic, homography-algebraic, "
      "homography-geometric, affinity, triangulation)");
}

void emit_report(const maxcon::ExperimentReport& report,
                 const std::string& out, const std::string& format) {
  if (format != "csv" && format != "json") {
    throw std::invalid_argument("unknown format '" + format + "' (use csv or json)");
  }
  if (out.empty()) {
    if (format == "csv") {
      std::cout << maxcon::report_to_csv(report);
    } else {
      std::cout << maxcon::report_to_json(report).dump(2) << "\n";
    }
    return;
  }
  if (format == "csv") {
    maxcon::save_report_csv(out, report);
  } else {
    maxcon::save_report_json(out, report);
  }
  std::cerr << "wrote " << out << "\n";
}

// ---------------------------------------------------------------------------
// synth

int cmd_synth(const maxcon::SynthConfig& cfg, const std::string& out) {
  const maxcon::SynthProblem prob = maxcon::synth_linear(cfg);
  std::vector<std::string> comments;
  {
    std::ostringstream os;
    os << "generator: n=" << cfg.n << " d=" << cfg.d << " sigma_in=" << cfg.sigma_in
       << " outlier_fraction=" << cfg.outlier_fraction
       << " balanced=" << (cfg.balanced ? 1 : 0) << " seed=" << cfg.seed
       << " epsilon=" << cfg.epsilon;
    comments.push_back(os.str());
  }
  {
    std::ostringstream os;
    os << "theta_true:";
    for (int k = 0; k < prob.theta_true.size(); ++k) {
      os << " " << maxcon::detail::format_double(prob.theta_true(k));
    }
    comments.push_back(os.str());
  }
  if (out.empty()) throw std::invalid_argument("synth: --out is required");
  maxcon::save_linear_dataset(out, prob.data, comments);
  std::cerr << "wrote " << out << " (" << prob.data.n() << " x " << prob.data.d()
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit

int cmd_fit(const std::string& data_path, const std::string& kind,
            const std::string& method, const std::string& init,
            const ProfileFlags& pf, std::uint64_t seed, const std::string& out,
            const std::string& format) {
  std::string name = method;
  if (!init.empty()) {
    if (method != "ep" && method != "am") {
      throw std::invalid_argument("--init only applies to methods ep and am");
    }
    name = method + "-" + init;
  }
  const maxcon::MethodSpec spec = maxcon::parse_method(name);
  const std::string canon = maxcon::canonical_method_name(spec);
  const maxcon::Profile prof =
      resolve_profile(pf, kind == "linear" ? "linear" : kind);
  const maxcon::Problem pb = load_problem(kind, data_path, prof.epsilon);

  maxcon::ExperimentReport report;
  report.master_seed = seed;
  report.config.emplace_back("kind", pb.kind);
  report.config.emplace_back("profile", prof.name);
  {
    std::ostringstream os;
    os << pb.epsilon;
    report.config.emplace_back("epsilon", os.str());
    os.str("");
    os << pb.num_data();
    report.config.emplace_back("num_data", os.str());
  }
  maxcon::MethodSummary summary;
  summary.method = canon;
  maxcon::RunRecord rec;
  rec.method = canon;
  rec.run = 0;
  rec.seed = maxcon::run_seed(seed, canon, 0);
  const maxcon::FitResult fit = maxcon::run_method(pb, canon, prof, rec.seed);
  rec.consensus = fit.consensus;
  rec.time_s = fit.wall_time;
  rec.converged = fit.converged;
  rec.tainted = fit.tainted;
  summary.mean_consensus = rec.consensus;
  summary.mean_time_s = rec.time_s;
  summary.runs.push_back(rec);
  report.methods.push_back(summary);

  std::cerr << canon << ": consensus " << fit.consensus << " / " << pb.num_data()
            << ", " << fit.iterations << " iterations, "
            << (fit.converged ? "converged" : "did not converge") << "\n";
  for (const std::string& w : fit.warnings) std::cerr << "warning: " << w << "\n";
  emit_report(report, out, format);
  return fit.converged ? 0 : 2;
}

// ---------------------------------------------------------------------------
// bench

std::map<std::string, std::string> parse_preset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << path << ":" << lineno << ": expected key=value";
      throw std::runtime_error(os.str());
    }
    auto trim = [](std::string s) {
      const auto x = s.find_first_not_of(" \t\r");
      if (x == std::string::npos) return std::string();
      const auto y = s.find_last_not_of(" \t\r");
      return s.substr(x, y - x + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      std::ostringstream os;
      os << path << ":" << lineno << ": empty key";
      throw std::runtime_error(os.str());
    }
    kv[key] = value;
  }
  return kv;
}

double to_real(const std::map<std::string, std::string>& kv,
               const std::string& key, double fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stod(it->second);
}

std::int64_t to_int(const std::map<std::string, std::string>& kv,
                    const std::string& key, std::int64_t fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stoll(it->second);
}

int cmd_bench(const std::string& preset_path,
              const std::vector<std::string>& overrides, const ProfileFlags& pf,
              std::uint64_t seed, bool seed_given, const std::string& out,
              const std::string& format) {
  std::map<std::string, std::string> kv = parse_preset_file(preset_path);
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("--set expects key=value, got '" + o + "'");
    }
    kv[o.substr(0, eq)] = o.substr(eq + 1);
  }
  static const std::vector<std::string> known = {
      "kind",    "data",   "epsilon",          "profile",
      "methods", "seed",   "runs",             "n",
      "d",       "sigma_in", "outlier_fraction", "balanced"};
  for (const auto& entry : kv) {
    if (std::find(known.begin(), known.end(), entry.first) == known.end()) {
      throw std::invalid_argument(preset_path + ": unknown key '" + entry.first + "'");
    }
  }

  const std::string kind = kv.count("kind") ? kv.at("kind") : "linear";
  ProfileFlags merged = pf;
  if (merged.profile.empty() && kv.count("profile")) merged.profile = kv.at("profile");
  if (merged.epsilon <= 0.0 && kv.count("epsilon")) {
    merged.epsilon = std::stod(kv.at("epsilon"));
  }
  const maxcon::Profile prof = resolve_profile(
      merged, kind == "linear-synth" ? "linear" : kind);

  maxcon::Problem pb;
  if (kind == "linear-synth") {
    maxcon::SynthConfig sc;
    sc.n = static_cast<int>(to_int(kv, "n", sc.n));
    sc.d = static_cast<int>(to_int(kv, "d", sc.d));
    sc.sigma_in = to_real(kv, "sigma_in", sc.sigma_in);
    sc.outlier_fraction = to_real(kv, "outlier_fraction", sc.outlier_fraction);
    sc.balanced = to_int(kv, "balanced", 1) != 0;
    sc.seed = static_cast<std::uint64_t>(to_int(kv, "seed", 0));
    sc.epsilon = prof.epsilon;
    pb = maxcon::make_linear_problem(maxcon::synth_linear(sc).data, prof.epsilon);
    pb.kind = "linear-synth";
  } else {
    if (!kv.count("data")) {
      throw std::invalid_argument(preset_path + ": missing 'data' for kind '" + kind + "'");
    }
    // Data paths resolve relative to the preset file, so presets work from
    // any working directory.
    std::filesystem::path data_path(kv.at("data"));
    if (data_path.is_relative()) {
      data_path = std::filesystem::path(preset_path).parent_path() / data_path;
    }
    pb = load_problem(kind, data_path.string(), prof.epsilon);
  }

  maxcon::ExperimentConfig ec;
  ec.profile = prof;
  ec.master_seed = seed_given ? seed : static_cast<std::uint64_t>(to_int(kv, "seed", 0));
  ec.runs_randomized = static_cast<int>(to_int(kv, "runs", 10));
  if (kv.count("methods") && !kv.at("methods").empty()) {
    std::istringstream is(kv.at("methods"));
    std::string name;
    while (std::getline(is, name, ',')) {
      const auto x = name.find_first_not_of(" \t");
      const auto y = name.find_last_not_of(" \t");
      if (x != std::string::npos) ec.methods.push_back(name.substr(x, y - x + 1));
    }
  }

  const maxcon::ExperimentReport report = maxcon::run_experiment(pb, ec);
  for (const maxcon::MethodSummary& m : report.methods) {
    std::cerr << m.method << ": mean consensus " << m.mean_consensus << " over "
              << m.runs.size() << " run(s)\n";
  }
  emit_report(report, out, format);
  return report.all_converged() ? 0 : 2;
}

// ---------------------------------------------------------------------------
// oracle

int cmd_oracle(const std::string& data_path, double epsilon,
               const std::string& out, const std::string& format) {
  if (epsilon <= 0.0) throw std::invalid_argument("oracle: --epsilon must be > 0");
  const maxcon::RegressionDataset data = maxcon::load_linear_dataset(data_path);
  const maxcon::OracleResult res = maxcon::oracle_solve(data, epsilon);
  std::cerr << "oracle: consensus " << res.consensus << " / " << data.n()
            << (res.certified ? "" : " (not certified)") << "\n";
  if (format == "csv") {
    std::ostringstream os;
    os << "consensus,certified,candidates";
    for (int k = 0; k < res.theta.size(); ++k) os << ",theta_" << k;
    os << "\n" << res.consensus << "," << (res.certified ? 1 : 0) << ","
       << res.candidates;
    for (int k = 0; k < res.theta.size(); ++k) {
      os << "," << maxcon::detail::format_double(res.theta(k));
    }
    os << "\n";
    if (out.empty()) {
      std::cout << os.str();
    } else {
      std::ofstream f = maxcon::detail::open_output(out);
      f << os.str();
      std::cerr << "wrote " << out << "\n";
    }
  } else if (format == "json") {
    nlohmann::ordered_json doc;
    doc["consensus"] = res.consensus;
    doc["certified"] = res.certified;
    doc["candidates"] = res.candidates;
    doc["theta"] = nlohmann::ordered_json::array();
    for (int k = 0; k < res.theta.size(); ++k) doc["theta"].push_back(res.theta(k));
    if (out.empty()) {
      std::cout << doc.dump(2) << "\n";
    } else {
      std::ofstream f = maxcon::detail::open_output(out);
      f << doc.dump(2) << "\n";
      std::cerr << "wrote " << out << "\n";
    }
  } else {
    throw std::invalid_argument("unknown format '" + format + "' (use csv or json)");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic maximum-consensus robust fitting"};
  app.require_subcommand(1);

  // synth ---------------------------------------------------------------
  maxcon::SynthConfig sc;
  std::string synth_out;
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic linear dataset");
  synth->add_option("--n", sc.n, "number of data");
  synth->add_option("--d", sc.d, "model dimension");
  synth->add_option("--sigma-in", sc.sigma_in, "inlier noise deviation");
  synth->add_option("--outlier-fraction", sc.outlier_fraction, "fraction corrupted");
  synth->add_flag("--unbalanced{false}", sc.balanced,
                  "corrupt only above the model plane");
  synth->add_option("--seed", sc.seed, "generator seed");
  synth->add_option("--epsilon", sc.epsilon, "inlier band recorded with the data");
  synth->add_option("--out", synth_out, "output CSV path")->required();

  // fit -------------------------------------------------------------------
  std::string fit_data, fit_kind = "linear", fit_method, fit_init;
  std::string fit_out, fit_format = "csv";
  std::uint64_t fit_seed = 0;
  ProfileFlags fit_pf;
  CLI::App* fit = app.add_subcommand("fit", "run one method on one dataset");
  fit->add_option("--data", fit_data, "dataset path")->required();
  fit->add_option("--kind", fit_kind, "dataset kind (linear, *-algebraic, ...)");
  fit->add_option("--method", fit_method, "method name (lsq, rs, lors, lors1, l1, linf, ep[-init], am[-init])")
      ->required();
  fit->add_option("--init", fit_init, "initializer for ep/am (rs, lsq, linf)");
  add_profile_flags(fit, &fit_pf);
  fit->add_option("--seed", fit_seed, "master seed");
  fit->add_option("--out", fit_out, "report path (stdout when omitted)");
  fit->add_option("--format", fit_format, "csv or json");

  // bench -----------------------------------------------------------------
  std::string bench_preset, bench_out, bench_format = "csv";
  std::vector<std::string> bench_sets;
  std::uint64_t bench_seed = 0;
  ProfileFlags bench_pf;
  CLI::App* bench = app.add_subcommand("bench", "run an experiment from a preset file");
  bench->add_option("--preset", bench_preset, "preset file (key=value lines)")
      ->required();
  bench->add_option("--set", bench_sets, "override a preset key (key=value), repeatable");
  add_profile_flags(bench, &bench_pf);
  CLI::Option* bench_seed_opt =
      bench->add_option("--seed", bench_seed, "master seed (overrides the preset)");
  bench->add_option("--out", bench_out, "report path (stdout when omitted)");
  bench->add_option("--format", bench_format, "csv or json");

  // oracle ------------------------------------------------------------
  std::string oracle_data, oracle_out, oracle_format = "csv";
  double oracle_eps = 0.0;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "exact consensus by exhaustive search (small linear data only)");
  oracle->add_option("--data", oracle_data, "linear dataset path")->required();
  oracle->add_option("--epsilon", oracle_eps, "inlier band half-width")->required();
  oracle->add_option("--out", oracle_out, "output path (stdout when omitted)");
  oracle->add_option("--format", oracle_format, "csv or json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(sc, synth_out);
    if (fit->parsed()) {
      return cmd_fit(fit_data, fit_kind, fit_method, fit_init, fit_pf, fit_seed,
                     fit_out, fit_format);
    }
    if (bench->parsed()) {
      return cmd_bench(bench_preset, bench_sets, bench_pf, bench_seed,
                       bench_seed_opt->count() > 0, bench_out, bench_format);
    }
    if (oracle->parsed()) {
      return cmd_oracle(oracle_data, oracle_eps, oracle_out, oracle_format);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: expected a subcommand (synth|fit|bench|oracle)\n";
  return 1;
}
