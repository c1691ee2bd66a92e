#pragma once

// Hypothesized graph structures over p nodes and their structural summary.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ggmgof/error.hpp"

namespace ggm {

using Index = Eigen::Index;

/// Symmetric edge pattern of a precision matrix. Every node carries its
/// diagonal entry, so each column support has at least one element.
class EdgeSet {
 public:
  EdgeSet() = default;

  /// Builds the closure of `pairs` under transposition plus the diagonal.
  /// Indices are 0-based.
  EdgeSet(Index p, const std::vector<std::pair<Index, Index>>& pairs)
      : p_(p), columns_(static_cast<std::size_t>(p > 0 ? p : 0)) {
    if (p < 1) throw InvalidArgument("edge set needs p >= 1");
    for (Index i = 0; i < p; ++i) columns_[i].push_back(i);
    for (const auto& [i, j] : pairs) {
      check_index(i);
      check_index(j);
      if (i == j) continue;
      columns_[i].push_back(j);
      columns_[j].push_back(i);
    }
    normalize();
  }

  Index p() const noexcept { return p_; }

  bool contains(Index i, Index j) const {
    if (i < 0 || j < 0 || i >= p_ || j >= p_) return false;
    const auto& col = columns_[j];
    return std::binary_search(col.begin(), col.end(), i);
  }

  /// Sorted row indices k with (k, j) in the set, diagonal included.
  const std::vector<Index>& support(Index j) const {
    check_index(j);
    return columns_[j];
  }

  /// Number of ordered pairs, diagonal included.
  std::size_t size() const noexcept {
    std::size_t total = 0;
    for (const auto& c : columns_) total += c.size();
    return total;
  }

  /// Strict upper triangle as (i, j) with i < j.
  std::vector<std::pair<Index, Index>> upper_pairs() const {
    std::vector<std::pair<Index, Index>> out;
    for (Index j = 0; j < p_; ++j)
      for (Index i : columns_[j])
        if (i < j) out.emplace_back(i, j);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Drops every off-diagonal edge at `node` and connects it to
  /// `new_neighbors` instead.
  EdgeSet rewired(Index node, const std::vector<Index>& new_neighbors) const {
    check_index(node);
    for (Index j : new_neighbors) {
      check_index(j);
      if (j == node)
        throw InvalidArgument("rewired node cannot list itself as neighbor");
    }
    EdgeSet out = *this;
    for (Index j : columns_[node]) {
      if (j == node) continue;
      auto& col = out.columns_[j];
      col.erase(std::remove(col.begin(), col.end(), node), col.end());
    }
    out.columns_[node].assign(1, node);
    for (Index j : new_neighbors) {
      out.columns_[node].push_back(j);
      out.columns_[j].push_back(node);
    }
    out.normalize();
    return out;
  }

  /// Simultaneous relabeling: node i becomes perm[i].
  EdgeSet relabeled(const std::vector<Index>& perm) const {
    if (static_cast<Index>(perm.size()) != p_)
      throw InvalidArgument("permutation length must equal p");
    std::vector<std::pair<Index, Index>> pairs;
    for (const auto& [i, j] : upper_pairs()) pairs.emplace_back(perm[i], perm[j]);
    return EdgeSet(p_, pairs);
  }

  friend bool operator==(const EdgeSet& a, const EdgeSet& b) {
    return a.p_ == b.p_ && a.columns_ == b.columns_;
  }

 private:
  void check_index(Index i) const {
    if (i < 0 || i >= p_)
      throw InvalidArgument("node index " + std::to_string(i) +
                            " outside [0, " + std::to_string(p_) + ")");
  }

  void normalize() {
    for (auto& c : columns_) {
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
    }
  }

  Index p_ = 0;
  std::vector<std::vector<Index>> columns_;
};

struct StructureStats {
  std::vector<Index> column_supports;
  Index s0 = 0;
  Index isolated_count = 0;
  double beta = 0.0;
  double gamma = 1.0;
};

/// gamma = (1 - beta^2 / 2)^-2 with beta the isolated-node fraction.
inline double gamma_from_isolated(Index isolated, Index p) {
  const double beta = static_cast<double>(isolated) / static_cast<double>(p);
  const double base = 1.0 - beta * beta / 2.0;
  return 1.0 / (base * base);
}

inline StructureStats structure_stats(const EdgeSet& edges) {
  StructureStats st;
  const Index p = edges.p();
  st.column_supports.reserve(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) {
    const auto s = static_cast<Index>(edges.support(j).size());
    st.column_supports.push_back(s);
    st.s0 = std::max(st.s0, s);
    if (s == 1) ++st.isolated_count;
  }
  st.beta = static_cast<double>(st.isolated_count) / static_cast<double>(p);
  st.gamma = gamma_from_isolated(st.isolated_count, p);
  return st;
}

/// {(i, j) : |i - j| < width}
inline EdgeSet band_edge_set(Index p, Index width) {
  if (p < 1) throw InvalidArgument("band edge set needs p >= 1");
  if (width < 1 || width > p)
    throw InvalidArgument("band width must lie in [1, p], got " +
                          std::to_string(width));
  std::vector<std::pair<Index, Index>> pairs;
  for (Index j = 0; j < p; ++j)
    for (Index i = j + 1; i < std::min(p, j + width); ++i) pairs.emplace_back(j, i);
  return EdgeSet(p, pairs);
}

inline EdgeSet isolated_edge_set(Index p) { return EdgeSet(p, {}); }

inline EdgeSet complete_edge_set(Index p) { return band_edge_set(p, p); }

/// Support of a symmetric matrix: |M_ij| > tol, plus the diagonal. Entries
/// mirrored to within 1e-12 relative count as symmetric.
inline EdgeSet support_edge_set(const Eigen::MatrixXd& m, double tol = 0.0) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw InvalidArgument("support needs a non-empty square matrix");
  if (tol < 0.0) throw InvalidArgument("support tolerance must be >= 0");
  const Index p = m.rows();
  std::vector<std::pair<Index, Index>> pairs;
  for (Index j = 0; j < p; ++j) {
    for (Index i = j + 1; i < p; ++i) {
      const double a = std::abs(m(i, j));
      const double b = std::abs(m(j, i));
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * std::max({a, b, 1.0}))
        throw InvalidArgument("support requires a symmetric matrix");
      if (std::max(a, b) > tol) pairs.emplace_back(i, j);
    }
  }
  return EdgeSet(p, pairs);
}

inline EdgeSet node_rewire(const EdgeSet& edges, Index node,
                           const std::vector<Index>& new_neighbors) {
  return edges.rewired(node, new_neighbors);
}

}  // namespace ggm
