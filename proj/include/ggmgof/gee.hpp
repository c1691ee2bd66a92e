#pragma once

// Linear GEE with a fixed working precision matrix and the subsampling
// bootstrap of coefficient standard errors.
//
// Subject i has responses Y_i (length T) and design X_i = 1_T (1, x_i^T).
// beta solves sum_i X_i^T W (Y_i - X_i beta) = 0; its covariance is the
// sandwich A^{-1} M A^{-1} with A = sum X_i^T W X_i and
// M = sum X_i^T W r_i r_i^T W X_i.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ggmgof/error.hpp"
#include "ggmgof/estimator.hpp"
#include "ggmgof/matrix_gen.hpp"
#include "ggmgof/parallel.hpp"
#include "ggmgof/sampler.hpp"

namespace ggm {

/// Two-sided 5% normal critical value.
inline constexpr double kZ975 = 1.959963984540054;

class GeeProblem {
 public:
  GeeProblem(Eigen::MatrixXd responses, Eigen::MatrixXd covariates,
             Eigen::MatrixXd working_precision)
      : y_(std::move(responses)),
        x_(std::move(covariates)),
        w_(std::move(working_precision)) {
    if (y_.rows() < 1 || y_.cols() < 1)
      throw InvalidArgument("GEE responses must be non-empty");
    if (x_.rows() != y_.rows())
      throw InvalidArgument("covariates have " + std::to_string(x_.rows()) +
                            " rows but responses have " + std::to_string(y_.rows()));
    if (w_.rows() != y_.cols() || w_.cols() != y_.cols())
      throw InvalidArgument("working precision must be T x T with T = " +
                            std::to_string(y_.cols()));
    detail::require_square_symmetric(w_, "working precision");
    detail::require_positive_definite(w_, "working precision");
  }

  Index subjects() const noexcept { return y_.rows(); }
  Index times() const noexcept { return y_.cols(); }
  /// Intercept plus one coefficient per covariate column.
  Index coefficients() const noexcept { return x_.cols() + 1; }

  const Eigen::MatrixXd& responses() const noexcept { return y_; }
  const Eigen::MatrixXd& covariates() const noexcept { return x_; }
  const Eigen::MatrixXd& working_precision() const noexcept { return w_; }

  /// Same working matrix; subjects restricted to `rows`.
  GeeProblem subset(const std::vector<Index>& rows) const {
    Eigen::MatrixXd y(static_cast<Index>(rows.size()), y_.cols());
    Eigen::MatrixXd x(static_cast<Index>(rows.size()), x_.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      y.row(static_cast<Index>(k)) = y_.row(rows[k]);
      x.row(static_cast<Index>(k)) = x_.row(rows[k]);
    }
    return GeeProblem(std::move(y), std::move(x), w_, Trusted{});
  }

 private:
  struct Trusted {};
  GeeProblem(Eigen::MatrixXd y, Eigen::MatrixXd x, Eigen::MatrixXd w, Trusted)
      : y_(std::move(y)), x_(std::move(x)), w_(std::move(w)) {}

  Eigen::MatrixXd y_;
  Eigen::MatrixXd x_;
  Eigen::MatrixXd w_;
};

struct GeeFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::MatrixXd covariance;
  std::vector<bool> significant;
};

/// Design block X_i = 1_T (1, x_i^T).
inline Eigen::MatrixXd gee_design(const GeeProblem& prob, Index subject) {
  const Index q = prob.coefficients();
  Eigen::MatrixXd xi(prob.times(), q);
  xi.col(0).setOnes();
  for (Index c = 1; c < q; ++c) xi.col(c).setConstant(prob.covariates()(subject, c - 1));
  return xi;
}

inline GeeFit fit_gee(const GeeProblem& prob) {
  const Index q = prob.coefficients();
  const Eigen::MatrixXd& w = prob.working_precision();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(q, q);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(q);
  std::vector<Eigen::MatrixXd> xw(static_cast<std::size_t>(prob.subjects()));
  for (Index i = 0; i < prob.subjects(); ++i) {
    const Eigen::MatrixXd xi = gee_design(prob, i);
    xw[i] = xi.transpose() * w;
    a.noalias() += xw[i] * xi;
    b.noalias() += xw[i] * prob.responses().row(i).transpose();
  }
  a = (a + a.transpose()) * 0.5;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  const double rc = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
  const Eigen::VectorXd pivots = ldlt.vectorD();
  if (!(rc * kSingularCondition >= 1.0) || !ldlt.isPositive() ||
      !(pivots.minCoeff() * kSingularCondition > pivots.maxCoeff()))
    throw SingularDesign("GEE design matrix is rank deficient");

  GeeFit fit;
  fit.beta = ldlt.solve(b);

  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(q, q);
  for (Index i = 0; i < prob.subjects(); ++i) {
    const Eigen::VectorXd resid =
        prob.responses().row(i).transpose() - gee_design(prob, i) * fit.beta;
    const Eigen::VectorXd u = xw[i] * resid;
    meat.noalias() += u * u.transpose();
  }
  const Eigen::MatrixXd ainv = ldlt.solve(Eigen::MatrixXd::Identity(q, q));
  Eigen::MatrixXd cov = ainv * meat * ainv;
  fit.covariance = (cov + cov.transpose()) * 0.5;
  fit.se = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.significant.resize(static_cast<std::size_t>(q));
  for (Index c = 0; c < q; ++c)
    fit.significant[c] = fit.se(c) > 0.0 && std::abs(fit.beta(c) / fit.se(c)) > kZ975;
  return fit;
}

/// Mean and divide-by-R standard deviation of each coefficient's standard
/// error over subsampled refits.
struct BootstrapSummary {
  Eigen::VectorXd ave;
  Eigen::VectorXd sd;
  Eigen::MatrixXd se_draws;  // repeats x coefficients
};

/// Draws `size` distinct indices from [0, m) by a partial Fisher-Yates
/// shuffle on stream `stream` of `seed`.
inline std::vector<Index> subsample_indices(Index m, Index size, std::uint64_t seed,
                                            std::uint64_t stream) {
  std::vector<Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Index{0});
  const std::uint64_t key = rng::stream_key(seed, stream);
  for (Index k = 0; k < size; ++k) {
    const auto span = static_cast<std::uint64_t>(m - k);
    const auto pick = k + static_cast<Index>(rng::below(rng::bits(key, static_cast<std::uint64_t>(k)), span));
    std::swap(idx[k], idx[pick]);
  }
  idx.resize(static_cast<std::size_t>(size));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline BootstrapSummary subsample_bootstrap(const GeeProblem& prob, Index subset_size,
                                            Index repeats, std::uint64_t seed,
                                            int threads = 1) {
  if (subset_size < 1 || subset_size >= prob.subjects())
    throw InvalidArgument("subset size must lie in [1, m)");
  if (repeats < 1) throw InvalidArgument("repeats must be >= 1");
  const Index q = prob.coefficients();
  BootstrapSummary out;
  out.se_draws.resize(repeats, q);
  parallel_for(repeats, threads, [&](Index r) {
    const auto rows =
        subsample_indices(prob.subjects(), subset_size, seed, static_cast<std::uint64_t>(r));
    out.se_draws.row(r) = fit_gee(prob.subset(rows)).se.transpose();
  });
  out.ave = out.se_draws.colwise().mean().transpose();
  out.sd.resize(q);
  for (Index c = 0; c < q; ++c)
    out.sd(c) = std::sqrt((out.se_draws.col(c).array() - out.ave(c)).square().sum() /
                          static_cast<double>(repeats));
  return out;
}

/// Symmetric working precision from a column-wise constrained fit:
/// (W + W^T) / 2, checked positive definite.
inline Eigen::MatrixXd working_precision_from(const ConstrainedPrecision& fit) {
  Eigen::MatrixXd w = (fit.entries() + fit.entries().transpose()) * 0.5;
  detail::require_positive_definite(w, "symmetrized constrained precision");
  return w;
}

}  // namespace ggm
