#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "ggmgof/estimator.hpp"
#include "ggmgof/sampler.hpp"
#include "oracles.hpp"

using namespace ggm;

namespace {

Eigen::MatrixXd integer_data() {
  Eigen::MatrixXd x(4, 3);
  x << 1, 2, 0,
       3, -1, 4,
       0, 5, 2,
       7, 1, -3;
  return x;
}

Dataset gaussian_data(Index n, Index p, std::uint64_t seed) {
  return Dataset(rng::standard_normal_matrix(n, p, rng::stream_key(seed, 0)));
}

}  // namespace

TEST(SampleCovariance, TwoObservations) {
  Eigen::MatrixXd x(2, 2);
  x << 0, 0, 2, 0;
  Eigen::MatrixXd expect(2, 2);
  expect << 2, 0, 0, 0;
  EXPECT_EQ(sample_covariance(Dataset(x)), expect);
}

TEST(SampleCovariance, ConstantData) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(6, 3, 2.5);
  EXPECT_EQ(sample_covariance(Dataset(x)), Eigen::MatrixXd::Zero(3, 3));
}

TEST(SampleCovariance, MatchesTwoPassOracle) {
  const Eigen::MatrixXd x = integer_data();
  const Eigen::MatrixXd s = sample_covariance(Dataset(x));
  EXPECT_LT((s - oracle::sample_covariance(x)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(s, s.transpose());
}

TEST(SampleCovariance, NeedsTwoRows) {
  EXPECT_THROW(sample_covariance(Dataset(Eigen::MatrixXd::Ones(1, 3))), InsufficientData);
}

TEST(SampleCovariance, RowOrderDoesNotChangeBits) {
  const auto d = gaussian_data(30, 4, 5);
  Eigen::MatrixXd shuffled = d.rows();
  std::mt19937 gen(1);
  std::vector<Index> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);
  for (Index r = 0; r < 30; ++r) shuffled.row(r) = d.rows().row(perm[r]);
  EXPECT_EQ(sample_covariance(d), sample_covariance(Dataset(shuffled)));
}

TEST(ConstrainedFit, DiagonalOnly) {
  const auto d = gaussian_data(40, 5, 2);
  const Eigen::MatrixXd s = sample_covariance(d);
  const auto fit = fit_constrained_precision(s, isolated_edge_set(5), 40);
  for (Index i = 0; i < 5; ++i)
    for (Index k = 0; k < 5; ++k) {
      if (i == k)
        EXPECT_DOUBLE_EQ(fit.coefficient(i, i), 1.0 / s(i, i));
      else
        EXPECT_EQ(fit.coefficient(i, k), 0.0);
    }
}

TEST(ConstrainedFit, CompleteGraphGivesInverse) {
  for (Index p : {4, 20, 50}) {
    const auto d = gaussian_data(std::max<Index>(50, 3 * p), p, 7 + p);
    const Eigen::MatrixXd s = sample_covariance(d);
    const auto fit = fit_constrained_precision(s, complete_edge_set(p), d.n());
    const Eigen::MatrixXd inv = s.fullPivLu().inverse();
    EXPECT_LT((fit.entries() - inv).cwiseAbs().maxCoeff(), p == 4 ? 1e-10 : 1e-8) << p;
  }
}

TEST(ConstrainedFit, MatchesSelectionOracle) {
  const auto d = gaussian_data(60, 8, 3);
  const Eigen::MatrixXd s = sample_covariance(d);
  const EdgeSet e = band_edge_set(8, 3).rewired(0, {4, 6});
  const auto fit = fit_constrained_precision(s, e, 60);
  EXPECT_LT((fit.entries() - oracle::constrained_precision(s, e)).cwiseAbs().maxCoeff(), 1e-12);
  for (Index i = 0; i < 8; ++i)
    for (Index k = 0; k < 8; ++k)
      if (!e.contains(k, i)) {
        EXPECT_EQ(fit.coefficient(i, k), 0.0);
      }
}

TEST(ConstrainedFit, SupportResidualsVanish) {
  const auto d = gaussian_data(80, 12, 4);
  const Eigen::MatrixXd s = sample_covariance(d);
  const EdgeSet e = band_edge_set(12, 4);
  const auto fit = fit_constrained_precision(s, e, 80);
  for (Index i = 0; i < 12; ++i)
    for (Index j : e.support(i)) {
      const double r = s.row(j).dot(fit.entries().col(i)) - (i == j ? 1.0 : 0.0);
      EXPECT_LE(std::abs(r), 1e-10);
    }
}

TEST(ConstrainedFit, ThreadCountDoesNotMatter) {
  const auto d = gaussian_data(100, 30, 9);
  const Eigen::MatrixXd s = sample_covariance(d);
  const EdgeSet e = band_edge_set(30, 5);
  EXPECT_EQ(fit_constrained_precision(s, e, 100, 1).entries(),
            fit_constrained_precision(s, e, 100, 4).entries());
}

TEST(ConstrainedFit, ScaleEquivariance) {
  const auto d = gaussian_data(50, 6, 10);
  const EdgeSet e = band_edge_set(6, 2);
  const auto a = fit_constrained_precision(d, e);
  const auto b = fit_constrained_precision(Dataset(3.0 * d.rows()), e);
  EXPECT_LT((b.entries() * 9.0 - a.entries()).cwiseAbs().maxCoeff(),
            1e-10 * a.entries().cwiseAbs().maxCoeff());
}

TEST(ConstrainedFit, ConsistentUnderTrueSupport) {
  const auto omega = banded_exponential_precision(20, 4, 0.6);
  const auto x = sample_mvn(invert_to_covariance(omega), 10000, 31);
  const auto fit = fit_constrained_precision(x, support_edge_set(omega));
  EXPECT_LT((fit.entries() - omega.matrix()).cwiseAbs().maxCoeff(), 0.1);
}

TEST(ConstrainedFit, Errors) {
  const auto d = gaussian_data(4, 6, 1);
  const Eigen::MatrixXd s = sample_covariance(d);
  try {
    fit_constrained_precision(s, complete_edge_set(6), 4);
    FAIL();
  } catch (const InsufficientData& e) {
    EXPECT_EQ(e.column(), 0);
  }
  // Duplicated variables make every 2x2 support block singular.
  Eigen::MatrixXd x = rng::standard_normal_matrix(30, 3, rng::stream_key(2, 0));
  x.col(2) = x.col(1);
  const Eigen::MatrixXd s2 = sample_covariance(Dataset(x));
  try {
    fit_constrained_precision(s2, EdgeSet(3, {{2, 1}}), 30);
    FAIL();
  } catch (const ColumnSingular& e) {
    EXPECT_EQ(e.column(), 1);
    EXPECT_GT(e.condition_estimate(), 1e12);
  }
  EXPECT_THROW(fit_constrained_precision(s2, band_edge_set(4, 2), 30), InvalidArgument);
}

TEST(StandardError, Examples) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  const ConstrainedPrecision est(complete_edge_set(3), id, 100);
  EXPECT_NEAR(entry_standard_error(est, 1, 1, 100), 0.14142, 1e-5);
  EXPECT_DOUBLE_EQ(entry_standard_error(est, 0, 2, 100), 0.1);

  Eigen::MatrixXd w(2, 2);
  w << 2, 1, 1, 3;
  const ConstrainedPrecision est2(complete_edge_set(2), w, 25);
  EXPECT_NEAR(entry_standard_error(est2, 0, 1, 25), 0.52915, 1e-5);
  EXPECT_NEAR(entry_standard_error(est2, 0, 1, 25), std::sqrt(7.0 / 25.0), 1e-15);
}

TEST(StandardError, Errors) {
  const ConstrainedPrecision iso(isolated_edge_set(3), Eigen::MatrixXd::Identity(3, 3), 10);
  EXPECT_THROW(entry_standard_error(iso, 0, 1, 10), InvalidArgument);
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(2, 2);
  w(1, 1) = -1.0;
  const ConstrainedPrecision bad(complete_edge_set(2), w, 10);
  EXPECT_THROW(entry_standard_error(bad, 0, 1, 10), DegenerateEstimate);
  const auto se = standard_errors(iso);
  EXPECT_EQ(se(0, 1), 0.0);
  EXPECT_GT(se(1, 1), 0.0);
}
