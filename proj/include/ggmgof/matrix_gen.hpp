#pragma once

// Precision-matrix families used throughout the simulations, with the
// positive-definiteness check every generator applies before returning.

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ggmgof/edge_set.hpp"
#include "ggmgof/error.hpp"

namespace ggm {

namespace detail {

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline void require_square_symmetric(const Eigen::MatrixXd& m,
                                     const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw InvalidArgument(std::string(what) + " must be a non-empty square matrix");
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = j + 1; i < m.rows(); ++i)
      if (m(i, j) != m(j, i))
        throw InvalidArgument(std::string(what) + " must be symmetric");
}

inline void require_positive_definite(const Eigen::MatrixXd& m,
                                      const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    const double lmin = min_eigenvalue(m);
    std::ostringstream os;
    os << what << " is not positive definite (smallest eigenvalue " << lmin
       << ")";
    throw NotPositiveDefinite(os.str(), lmin);
  }
}

}  // namespace detail

/// Symmetric positive-definite matrix tagged as a precision matrix.
class PrecisionMatrix {
 public:
  explicit PrecisionMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
    detail::require_square_symmetric(m_, "precision matrix");
    detail::require_positive_definite(m_, "precision matrix");
  }

  Index p() const noexcept { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

 private:
  Eigen::MatrixXd m_;
};

class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
    detail::require_square_symmetric(m_, "covariance matrix");
    detail::require_positive_definite(m_, "covariance matrix");
  }

  Index p() const noexcept { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

 private:
  Eigen::MatrixXd m_;
};

inline EdgeSet support_edge_set(const PrecisionMatrix& m, double tol = 0.0) {
  return support_edge_set(m.matrix(), tol);
}

namespace detail {

template <class Decay>
Eigen::MatrixXd banded(Index p, Index s0, Decay decay) {
  if (p < 1) throw InvalidArgument("dimension p must be >= 1");
  if (s0 < 1 || s0 > p)
    throw InvalidArgument("bandwidth s0 must lie in [1, p], got " +
                          std::to_string(s0));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
  for (Index j = 0; j < p; ++j) {
    m(j, j) = 1.0;
    for (Index d = 1; d < s0 && j + d < p; ++d) {
      const double v = decay(d);
      m(j + d, j) = v;
      m(j, j + d) = v;
    }
  }
  return m;
}

}  // namespace detail

/// omega_ij = base^|i-j| inside the band |i-j| < s0, zero outside.
inline PrecisionMatrix banded_exponential_precision(Index p, Index s0,
                                                    double base) {
  if (!(base > 0.0 && base < 1.0))
    throw InvalidArgument("exponential base must lie in (0, 1), got " +
                          std::to_string(base));
  return PrecisionMatrix(detail::banded(
      p, s0, [base](Index d) { return std::pow(base, static_cast<double>(d)); }));
}

/// omega_ij = (1 + |i-j|)^-lambda inside the band |i-j| < s0.
inline PrecisionMatrix banded_polynomial_precision(Index p, Index s0,
                                                   double lambda) {
  if (!(lambda >= 2.0))
    throw InvalidArgument("polynomial decay exponent must be >= 2, got " +
                          std::to_string(lambda));
  return PrecisionMatrix(detail::banded(p, s0, [lambda](Index d) {
    return std::pow(1.0 + static_cast<double>(d), -lambda);
  }));
}

struct FactorTerm {
  double alpha = 1.0;
  Eigen::VectorXd u;
};

/// I + sum_k alpha_k u_k u_k^T
inline PrecisionMatrix factor_precision(Index p,
                                        const std::vector<FactorTerm>& terms) {
  if (p < 1) throw InvalidArgument("dimension p must be >= 1");
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p);
  for (const auto& t : terms) {
    if (t.u.size() != p)
      throw InvalidArgument("factor loading length must equal p");
    // One product per pair, mirrored, so the result is bitwise symmetric.
    for (Index j = 0; j < p; ++j)
      for (Index i = j; i < p; ++i) {
        const double v = t.alpha * t.u(i) * t.u(j);
        m(i, j) += v;
        if (i != j) m(j, i) += v;
      }
  }
  return PrecisionMatrix(std::move(m));
}

inline PrecisionMatrix identity_precision(Index p) {
  if (p < 1) throw InvalidArgument("dimension p must be >= 1");
  return PrecisionMatrix(Eigen::MatrixXd::Identity(p, p));
}

namespace detail {

inline Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    const double lmin = min_eigenvalue(m);
    throw NotPositiveDefinite("matrix is not positive definite", lmin);
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  // Exact symmetry downstream (support checks, sampler) needs a mirrored copy.
  Eigen::MatrixXd sym = (inv + inv.transpose()) * 0.5;
  return sym;
}

}  // namespace detail

inline CovarianceMatrix invert_to_covariance(const PrecisionMatrix& m) {
  return CovarianceMatrix(detail::spd_inverse(m.matrix()));
}

inline PrecisionMatrix invert_to_precision(const CovarianceMatrix& m) {
  return PrecisionMatrix(detail::spd_inverse(m.matrix()));
}

}  // namespace ggm
