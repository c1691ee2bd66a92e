#pragma once

// File formats: headerless numeric CSV matrices, edge-set JSON (1-based
// pairs), and JSON renderings of reports and fits.

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ggmgof/edge_set.hpp"
#include "ggmgof/error.hpp"
#include "ggmgof/gee.hpp"
#include "ggmgof/gof_test.hpp"

namespace ggm::io {

/// Reads a headerless numeric CSV. Every row must have the same width.
inline Eigen::MatrixXd read_csv_matrix(std::istream& in) {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Index width = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw ParseError("expected a number", lineno);
      values.push_back(v);
      ++width;
      p = res.ptr;
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (*p != ',') throw ParseError("expected ',' between values", lineno);
      ++p;
    }
    if (cols < 0) cols = width;
    if (width != cols)
      throw ParseError("row has " + std::to_string(width) + " values, expected " +
                           std::to_string(cols),
                       lineno);
    ++rows;
  }
  if (rows == 0) throw ParseError("empty matrix file");
  Eigen::MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = values[static_cast<std::size_t>(r * cols + c)];
  return m;
}

inline Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_csv_matrix(in);
}

/// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_csv_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

inline void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_csv_matrix(out, m);
}

// --- edge sets -------------------------------------------------------------

/// {"p": int, "edges": [[i, j], ...]} with 1-based pairs in either triangle.
inline EdgeSet edge_set_from_json(const nlohmann::json& j) {
  try {
    const Index p = j.at("p").get<Index>();
    if (p < 1) throw ConfigError("edge set p must be >= 1");
    std::vector<std::pair<Index, Index>> pairs;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        throw ConfigError("each edge must be a pair [i, j]");
      const Index a = e[0].get<Index>();
      const Index b = e[1].get<Index>();
      if (a < 1 || b < 1 || a > p || b > p)
        throw InvalidArgument("edge [" + std::to_string(a) + ", " + std::to_string(b) +
                              "] outside 1.." + std::to_string(p));
      pairs.emplace_back(a - 1, b - 1);
    }
    return EdgeSet(p, pairs);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("edge set: ") + e.what());
  }
}

/// Strict upper triangle, 1-based, with "diagonal": true.
inline nlohmann::json edge_set_to_json(const EdgeSet& edges) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [i, j] : edges.upper_pairs()) pairs.push_back({i + 1, j + 1});
  return {{"p", edges.p()}, {"edges", std::move(pairs)}, {"diagonal", true}};
}

inline EdgeSet read_edge_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("edge set '" + path + "': " + e.what());
  }
  return edge_set_from_json(j);
}

// --- reports ---------------------------------------------------------------

inline nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

/// Entries are emitted 1-based as {"i": node, "j": row}.
inline nlohmann::json to_json(const TestReport& r) {
  nlohmann::json j;
  j["variant"] = to_string(r.variant);
  j["p"] = r.p;
  j["n"] = r.n;
  j["statistic"] = finite_or_null(r.statistic);
  j["centering"] = finite_or_null(r.centering);
  j["gamma"] = r.gamma ? nlohmann::json(*r.gamma) : nlohmann::json(nullptr);
  j["level"] = r.level;
  j["threshold"] = finite_or_null(r.threshold);
  j["p_value"] = r.p_value;
  j["reject"] = r.reject;
  j["decision"] = r.reject ? "reject" : "fail-to-reject";
  j["argmax"] = {{"i", r.argmax.column + 1}, {"j", r.argmax.row + 1}};
  if (r.node) j["node"] = *r.node + 1;
  if (r.variant == Variant::Empowered) {
    j["cn"] = r.cn;
    j["delta_n"] = r.delta_n;
    nlohmann::json flagged = nlohmann::json::array();
    for (const auto& e : r.flagged_entries) flagged.push_back({e.column + 1, e.row + 1});
    j["flagged_entries"] = std::move(flagged);
  }
  return j;
}

inline nlohmann::json to_json(const GeeFit& f) {
  nlohmann::json j;
  j["beta"] = std::vector<double>(f.beta.data(), f.beta.data() + f.beta.size());
  j["se"] = std::vector<double>(f.se.data(), f.se.data() + f.se.size());
  j["significant"] = f.significant;
  return j;
}

inline nlohmann::json to_json(const BootstrapSummary& b) {
  nlohmann::json j;
  j["ave"] = std::vector<double>(b.ave.data(), b.ave.data() + b.ave.size());
  j["sd"] = std::vector<double>(b.sd.data(), b.sd.data() + b.sd.size());
  j["repeats"] = b.se_draws.rows();
  return j;
}

}  // namespace ggm::io
