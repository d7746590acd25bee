// Copyright (c) 2026 maxcon contributors
// Licensed under the Apache License, Version 2.0.
//
// On-disk dataset formats. All three are line-oriented or JSON and carry no
// binary payloads, so fixtures diff cleanly under version control.
//
//   linear  ....  CSV, one datum per row: x_1,...,x_d,y. Lines starting with
//                 '#' are comments; the writer records provenance (and the
//                 generating parameters for synthetic data) in them.
//   matches ....  CSV, one correspondence per row: u_x,u_y,v_x,v_y.
//   tracks  ....  JSON object {"cameras": [[12 numbers, 3x4 row-major],...],
//                 "observations": [[u,v],...]} with equal-length arrays.
//
// Loaders validate shape and finiteness and report the offending line (or
// JSON path) in every error message.

#pragma once

#include <json.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "maxcon/geometry.hpp"
#include "maxcon/types.hpp"

namespace maxcon {

namespace detail {

inline std::string io_error(const std::string& path, int line,
                            const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line << ": " << what;
  return os.str();
}

// Splits one CSV line on commas, trimming surrounding spaces.
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string()
                                         : field.substr(b, e - b + 1));
  }
  return out;
}

inline double parse_number(const std::string& field, const std::string& path,
                           int line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &used);
  } catch (const std::exception&) {
    throw std::runtime_error(io_error(path, line, "not a number: '" + field + "'"));
  }
  if (used != field.size() || !std::isfinite(value)) {
    throw std::runtime_error(io_error(path, line, "not a finite number: '" + field + "'"));
  }
  return value;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  return out;
}

// Reads all data rows of a CSV file with a fixed column count.
inline std::vector<std::vector<double>> load_csv_rows(const std::string& path,
                                                      int arity,
                                                      const char* what) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const std::vector<std::string> fields = split_csv(line);
    if (arity > 0 && static_cast<int>(fields.size()) != arity) {
      std::ostringstream os;
      os << what << " rows need " << arity << " columns, got " << fields.size();
      throw std::runtime_error(io_error(path, lineno, os.str()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const std::string& f : fields) row.push_back(parse_number(f, path, lineno));
    if (!rows.empty() && rows.front().size() != row.size()) {
      std::ostringstream os;
      os << what << " rows must have a consistent column count ("
         << rows.front().size() << " vs " << row.size() << ")";
      throw std::runtime_error(io_error(path, lineno, os.str()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::runtime_error(path + ": no data rows");
  }
  return rows;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// linear: x_1,...,x_d,y per row (d inferred from the first data row).

inline RegressionDataset load_linear_dataset(const std::string& path) {
  const auto rows = detail::load_csv_rows(path, 0, "linear dataset");
  const int cols = static_cast<int>(rows.front().size());
  if (cols < 2) {
    throw std::runtime_error(path + ": linear dataset rows need at least 2 columns");
  }
  RegressionDataset data;
  data.x.resize(static_cast<int>(rows.size()), cols - 1);
  data.y.resize(static_cast<int>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (int k = 0; k + 1 < cols; ++k) data.x(static_cast<int>(j), k) = rows[j][static_cast<std::size_t>(k)];
    data.y(static_cast<int>(j)) = rows[j].back();
  }
  return data;
}

inline void save_linear_dataset(const std::string& path,
                                const RegressionDataset& data,
                                const std::vector<std::string>& comments = {}) {
  std::ofstream out = detail::open_output(path);
  out << "# linear dataset: x_1,...,x_d,y per row (d = " << data.d() << ")\n";
  for (const std::string& c : comments) out << "# " << c << "\n";
  for (int j = 0; j < data.n(); ++j) {
    for (int k = 0; k < data.d(); ++k) {
      out << detail::format_double(data.x(j, k)) << ",";
    }
    out << detail::format_double(data.y(j)) << "\n";
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

// ---------------------------------------------------------------------------
// matches: u_x,u_y,v_x,v_y per row.

inline std::vector<Match> load_matches(const std::string& path) {
  const auto rows = detail::load_csv_rows(path, 4, "match");
  std::vector<Match> matches(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    matches[j].p1 << rows[j][0], rows[j][1];
    matches[j].p2 << rows[j][2], rows[j][3];
  }
  return matches;
}

inline void save_matches(const std::string& path,
                         const std::vector<Match>& matches,
                         const std::vector<std::string>& comments = {}) {
  std::ofstream out = detail::open_output(path);
  out << "# matches: u_x,u_y,v_x,v_y per row\n";
  for (const std::string& c : comments) out << "# " << c << "\n";
  for (const Match& m : matches) {
    out << detail::format_double(m.p1.x()) << "," << detail::format_double(m.p1.y())
        << "," << detail::format_double(m.p2.x()) << ","
        << detail::format_double(m.p2.y()) << "\n";
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

// ---------------------------------------------------------------------------
// tracks: one point observed by many cameras, as JSON.

inline std::vector<CameraView> load_tracks(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("cameras") || !doc.contains("observations")) {
    throw std::runtime_error(path + ": expected an object with 'cameras' and 'observations'");
  }
  const auto& cams = doc["cameras"];
  const auto& obs = doc["observations"];
  if (!cams.is_array() || !obs.is_array() || cams.size() != obs.size()) {
    throw std::runtime_error(path + ": 'cameras' and 'observations' must be arrays of equal length");
  }
  if (cams.empty()) throw std::runtime_error(path + ": no views");
  std::vector<CameraView> views(cams.size());
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const auto& c = cams[i];
    if (!c.is_array() || c.size() != 12) {
      throw std::runtime_error(path + ": cameras[" + std::to_string(i) +
                               "] must hold 12 numbers (3x4 row-major)");
    }
    const auto& o = obs[i];
    if (!o.is_array() || o.size() != 2) {
      throw std::runtime_error(path + ": observations[" + std::to_string(i) +
                               "] must hold 2 numbers");
    }
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 4; ++k) {
        const auto& cell = c[static_cast<std::size_t>(4 * r + k)];
        if (!cell.is_number() || !std::isfinite(cell.get<double>())) {
          throw std::runtime_error(path + ": cameras[" + std::to_string(i) +
                                   "] has a non-finite entry");
        }
        views[i].p(r, k) = cell.get<double>();
      }
    }
    for (int k = 0; k < 2; ++k) {
      const auto& cell = o[static_cast<std::size_t>(k)];
      if (!cell.is_number() || !std::isfinite(cell.get<double>())) {
        throw std::runtime_error(path + ": observations[" + std::to_string(i) +
                                 "] has a non-finite entry");
      }
      views[i].obs(k) = cell.get<double>();
    }
  }
  return views;
}

inline void save_tracks(const std::string& path,
                        const std::vector<CameraView>& views) {
  nlohmann::ordered_json doc;
  doc["cameras"] = nlohmann::json::array();
  doc["observations"] = nlohmann::json::array();
  for (const CameraView& v : views) {
    nlohmann::ordered_json cam = nlohmann::ordered_json::array();
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 4; ++k) cam.push_back(v.p(r, k));
    }
    doc["cameras"].push_back(std::move(cam));
    nlohmann::ordered_json ob = nlohmann::ordered_json::array();
    ob.push_back(v.obs.x());
    ob.push_back(v.obs.y());
    doc["observations"].push_back(std::move(ob));
  }
  std::ofstream out = detail::open_output(path);
  out << doc.dump(2) << "\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace maxcon
