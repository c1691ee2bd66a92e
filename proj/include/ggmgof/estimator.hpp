#pragma once

// Sample covariance and the column-by-column constrained precision estimate.
//
// For column i with support rows B_i (diagonal included), the estimate is
//   w_i = B_i (B_i^T S B_i)^{-1} B_i^T e_i,
// which makes B_i^T S w_i = B_i^T e_i hold exactly up to rounding. Columns
// are fit independently and the assembled matrix is not symmetrized.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ggmgof/edge_set.hpp"
#include "ggmgof/error.hpp"
#include "ggmgof/parallel.hpp"
#include "ggmgof/sampler.hpp"

namespace ggm {

/// Condition estimates above this mark a support submatrix as singular.
inline constexpr double kSingularCondition = 1e12;

/// Mean-centered sample covariance with divisor n - 1.
///
/// Rows are put in lexicographic order before accumulation, so the result is
/// a function of the multiset of observations and is bitwise unchanged by
/// reordering them.
inline Eigen::MatrixXd sample_covariance(const Dataset& data) {
  const Index n = data.n();
  const Index p = data.p();
  if (n < 2)
    throw InsufficientData("sample covariance needs at least 2 observations");
  const Eigen::MatrixXd& x = data.rows();

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&x, p](Index a, Index b) {
    for (Index c = 0; c < p; ++c) {
      if (x(a, c) < x(b, c)) return true;
      if (x(b, c) < x(a, c)) return false;
    }
    return false;
  });

  Eigen::MatrixXd centered(n, p);
  for (Index r = 0; r < n; ++r) centered.row(r) = x.row(order[r]);
  const Eigen::RowVectorXd mean = centered.colwise().sum() / static_cast<double>(n);
  centered.rowwise() -= mean;

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
  s.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(),
                                              1.0 / static_cast<double>(n - 1));
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

/// Column-wise estimate of a precision matrix compatible with an edge set.
/// Column i holds w_i; entry (k, i) is the k-th coefficient of that fit.
class ConstrainedPrecision {
 public:
  ConstrainedPrecision(EdgeSet edges, Eigen::MatrixXd entries, Index n)
      : edges_(std::move(edges)), w_(std::move(entries)), n_(n) {}

  Index p() const noexcept { return edges_.p(); }
  Index n() const noexcept { return n_; }
  const EdgeSet& edges() const noexcept { return edges_; }
  const Eigen::MatrixXd& entries() const noexcept { return w_; }

  /// k-th coefficient of column i's fit.
  double coefficient(Index column, Index row) const { return w_(row, column); }
  double diagonal(Index i) const { return w_(i, i); }

 private:
  EdgeSet edges_;
  Eigen::MatrixXd w_;
  Index n_;
};

namespace detail {

inline Eigen::VectorXd solve_support_system(const Eigen::MatrixXd& a,
                                            const Eigen::VectorXd& rhs,
                                            Index column) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    const double rc = llt.rcond();
    if (rc * kSingularCondition >= 1.0) return llt.solve(rhs);
    throw ColumnSingular("support submatrix of column " + std::to_string(column) +
                             " is singular (condition estimate " +
                             std::to_string(1.0 / rc) + ")",
                         column, 1.0 / rc);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  const double rc = lu.rcond();
  if (!lu.isInvertible() || rc * kSingularCondition < 1.0) {
    // The estimate is meaningless once a pivot is exactly zero.
    const double cond = lu.isInvertible() && rc > 0.0 ? 1.0 / rc : INFINITY;
    throw ColumnSingular("support submatrix of column " + std::to_string(column) +
                             " is singular (condition estimate " +
                             std::to_string(cond) + ")",
                         column, cond);
  }
  return lu.solve(rhs);
}

}  // namespace detail

/// Coefficients of column i on its support `rows` (sorted, containing i).
inline Eigen::VectorXd fit_column(const Eigen::MatrixXd& s,
                                  const std::vector<Index>& rows, Index i,
                                  Index n) {
  const auto si = static_cast<Index>(rows.size());
  if (n - 1 < si)
    throw InsufficientData("column " + std::to_string(i) + " has support " +
                               std::to_string(si) + " but n - 1 = " +
                               std::to_string(n - 1),
                           i);
  Eigen::MatrixXd sub(si, si);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(si);
  for (Index b = 0; b < si; ++b) {
    for (Index a = 0; a < si; ++a) sub(a, b) = s(rows[a], rows[b]);
    if (rows[b] == i) rhs(b) = 1.0;
  }
  return detail::solve_support_system(sub, rhs, i);
}

/// Fits w_i = B_i (B_i^T S B_i)^{-1} B_i^T e_i for every column i.
inline ConstrainedPrecision fit_constrained_precision(const Eigen::MatrixXd& s,
                                                      const EdgeSet& edges,
                                                      Index n, int threads = 1) {
  const Index p = edges.p();
  if (s.rows() != p || s.cols() != p)
    throw InvalidArgument("sample covariance is " + std::to_string(s.rows()) +
                          "x" + std::to_string(s.cols()) +
                          " but the edge set has p = " + std::to_string(p));
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p, p);

  parallel_for(p, threads, [&](Index i) {
    const auto& rows = edges.support(i);
    const Eigen::VectorXd coef = fit_column(s, rows, i, n);
    for (std::size_t a = 0; a < rows.size(); ++a)
      w(rows[a], i) = coef(static_cast<Index>(a));
  });

  return ConstrainedPrecision(edges, std::move(w), n);
}

inline ConstrainedPrecision fit_constrained_precision(const Dataset& data,
                                                      const EdgeSet& edges,
                                                      int threads = 1) {
  return fit_constrained_precision(sample_covariance(data), edges, data.n(),
                                   threads);
}

/// sqrt((w_ii w_kk + w_ik^2) / n) for the coefficient at row k of column i.
inline double entry_standard_error(const ConstrainedPrecision& est, Index column,
                                   Index row, Index n) {
  if (!est.edges().contains(row, column))
    throw InvalidArgument("entry (" + std::to_string(row) + ", " +
                          std::to_string(column) + ") is not in the support");
  if (n < 1) throw InvalidArgument("sample size must be >= 1");
  const double dii = est.diagonal(column);
  const double dkk = est.diagonal(row);
  if (!(dii > 0.0) || !(dkk > 0.0))
    throw DegenerateEstimate("nonpositive diagonal estimate at column " +
                             std::to_string(dii > 0.0 ? row : column));
  const double wik = est.coefficient(column, row);
  return std::sqrt((dii * dkk + wik * wik) / static_cast<double>(n));
}

/// Standard errors for every supported coefficient, zero elsewhere.
inline Eigen::MatrixXd standard_errors(const ConstrainedPrecision& est) {
  const Index p = est.p();
  Eigen::MatrixXd se = Eigen::MatrixXd::Zero(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index k : est.edges().support(i))
      se(k, i) = entry_standard_error(est, i, k, est.n());
  return se;
}

}  // namespace ggm
