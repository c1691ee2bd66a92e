#include <gtest/gtest.h>

#include <random>

#include "ggmgof/matrix_gen.hpp"

using namespace ggm;

namespace {

double min_eig(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
}

}  // namespace

TEST(ExponentialBand, NarrowBandIsIdentity) {
  EXPECT_EQ(banded_exponential_precision(4, 1, 0.6).matrix(), Eigen::MatrixXd::Identity(4, 4));
}

TEST(ExponentialBand, FirstColumn) {
  const auto m = banded_exponential_precision(8, 4, 0.6);
  EXPECT_DOUBLE_EQ(m(0, 0), 1.0);
  EXPECT_NEAR(m(1, 0), 0.6, 1e-15);
  EXPECT_NEAR(m(2, 0), 0.36, 1e-15);
  EXPECT_NEAR(m(3, 0), 0.216, 1e-15);
  EXPECT_EQ(m(4, 0), 0.0);
}

TEST(ExponentialBand, PositiveDefinite) {
  const auto m = banded_exponential_precision(6, 4, 0.6);
  EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(m.matrix()).info(), Eigen::Success);
  EXPECT_GT(min_eig(m.matrix()), 0.0);
}

TEST(ExponentialBand, RejectsBadParameters) {
  EXPECT_THROW(banded_exponential_precision(5, 2, 1.5), InvalidArgument);
  EXPECT_THROW(banded_exponential_precision(5, 2, 0.0), InvalidArgument);
  EXPECT_THROW(banded_exponential_precision(5, 6, 0.5), InvalidArgument);
}

TEST(PolynomialBand, FirstColumn) {
  const auto m = banded_polynomial_precision(6, 4, 2.0);
  EXPECT_DOUBLE_EQ(m(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m(1, 0), 0.25);
  EXPECT_NEAR(m(2, 0), 1.0 / 9.0, 1e-15);
  EXPECT_DOUBLE_EQ(m(3, 0), 0.0625);
  EXPECT_EQ(m(4, 0), 0.0);
}

TEST(PolynomialBand, IdentityAndPd) {
  EXPECT_EQ(banded_polynomial_precision(3, 1, 2.0).matrix(), Eigen::MatrixXd::Identity(3, 3));
  EXPECT_GT(min_eig(banded_polynomial_precision(8, 6, 2.0).matrix()), 0.0);
  EXPECT_THROW(banded_polynomial_precision(8, 3, 1.5), InvalidArgument);
}

TEST(BandedGenerators, ExactZerosOutsideBand) {
  for (const auto& m : {banded_exponential_precision(30, 5, 0.6).matrix(),
                        banded_polynomial_precision(30, 5, 2.0).matrix()}) {
    for (Index i = 0; i < 30; ++i)
      for (Index j = 0; j < 30; ++j) {
        if (std::abs(i - j) >= 5) {
          EXPECT_EQ(m(i, j), 0.0);
          EXPECT_FALSE(std::signbit(m(i, j)));
        }
      }
  }
}

TEST(BandedGenerators, NotPositiveDefiniteReportsEigenvalue) {
  // base 0.9 with a wide band has a negative symbol at pi.
  try {
    banded_exponential_precision(40, 12, 0.9);
    FAIL() << "expected NotPositiveDefinite";
  } catch (const NotPositiveDefinite& e) {
    EXPECT_LT(e.min_eigenvalue(), 0.0);
    EXPECT_NE(std::string(e.what()).find("smallest eigenvalue"), std::string::npos);
  }
}

TEST(FactorPrecision, Basics) {
  EXPECT_EQ(factor_precision(4, {}).matrix(), Eigen::MatrixXd::Identity(4, 4));
  Eigen::VectorXd u = Eigen::VectorXd::Zero(6);
  u.head(3).setOnes();
  const auto m = factor_precision(6, {{1.0, u}});
  EXPECT_EQ(m(0, 1), 1.0);
  EXPECT_EQ(m(0, 3), 0.0);
  EXPECT_EQ(m(0, 0), 2.0);
  EXPECT_THROW(factor_precision(6, {{-2.0, Eigen::VectorXd::Unit(6, 0)}}), NotPositiveDefinite);
  EXPECT_THROW(factor_precision(6, {{1.0, Eigen::VectorXd::Ones(5)}}), InvalidArgument);
}

TEST(FactorPrecision, InverseSharesZeroPattern) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(10);
  u.head(3).setOnes();
  const auto omega = factor_precision(10, {{1.0, u}});
  const auto sigma = invert_to_covariance(omega);
  EXPECT_EQ(support_edge_set(omega.matrix(), 1e-10), support_edge_set(sigma.matrix(), 1e-10));
}

TEST(Invert, ClosedForms) {
  EXPECT_TRUE(invert_to_covariance(identity_precision(5)).matrix().isApprox(
      Eigen::MatrixXd::Identity(5, 5), 1e-15));

  Eigen::MatrixXd two(2, 2);
  two << 2, 1, 1, 2;
  Eigen::MatrixXd expect(2, 2);
  expect << 2, -1, -1, 2;
  expect /= 3.0;
  EXPECT_LT((invert_to_covariance(PrecisionMatrix(two)).matrix() - expect).cwiseAbs().maxCoeff(),
            1e-15);
}

TEST(Invert, ShermanMorrison) {
  const Index p = 12;
  Eigen::VectorXd u(p);
  for (Index i = 0; i < p; ++i) u(i) = 0.3 * static_cast<double>(i % 4) - 0.4;
  const auto omega = factor_precision(p, {{1.0, u}});
  const Eigen::MatrixXd sm =
      Eigen::MatrixXd::Identity(p, p) - u * u.transpose() / (1.0 + u.squaredNorm());
  const Eigen::MatrixXd sigma = invert_to_covariance(omega).matrix();
  EXPECT_LT((sigma - sm).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((omega.matrix() * sigma - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff(),
            1e-10);
}

TEST(Invert, Involution) {
  for (Index p : {5, 50, 200}) {
    const auto omega = banded_exponential_precision(p, 4, 0.6);
    const auto back = invert_to_precision(invert_to_covariance(omega));
    EXPECT_LT((back.matrix() - omega.matrix()).cwiseAbs().maxCoeff(), 1e-8) << "p=" << p;
    EXPECT_LT((omega.matrix() * invert_to_covariance(omega).matrix() -
               Eigen::MatrixXd::Identity(p, p))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-10);
  }
}

TEST(StrongTypes, RejectNonSymmetricAndIndefinite) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  m(0, 1) = 0.1;
  EXPECT_THROW(PrecisionMatrix{m}, InvalidArgument);
  Eigen::MatrixXd ind = Eigen::MatrixXd::Identity(2, 2);
  ind(0, 1) = ind(1, 0) = 2.0;
  EXPECT_THROW(CovarianceMatrix{ind}, NotPositiveDefinite);
}

TEST(FactorPrecisionProperty, RandomFactorsKeepZeroPattern) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> val(-1.5, 1.5);
  int checked = 0;
  while (checked < 50) {
    const Index p = 5 + static_cast<Index>(gen() % 36);
    const int k = 1 + static_cast<int>(gen() % 3);
    std::vector<FactorTerm> terms;
    for (int t = 0; t < k; ++t) {
      Eigen::VectorXd u = Eigen::VectorXd::Zero(p);
      const Index len = 1 + static_cast<Index>(gen() % 4);
      const Index start = static_cast<Index>(gen() % (p - len + 1));
      for (Index i = start; i < start + len; ++i) u(i) = val(gen);
      terms.push_back({0.25 + std::abs(val(gen)), u});
    }
    const auto omega = factor_precision(p, terms);
    const auto sigma = invert_to_covariance(omega);
    // Overlapping terms can fill in the inverse; the equality is asserted
    // for disjoint loadings only.
    bool disjoint = true;
    for (std::size_t a = 0; a < terms.size(); ++a)
      for (std::size_t b = a + 1; b < terms.size(); ++b)
        if ((terms[a].u.cwiseAbs().array() > 0 && terms[b].u.cwiseAbs().array() > 0).any())
          disjoint = false;
    if (!disjoint) continue;
    EXPECT_EQ(support_edge_set(omega.matrix(), 1e-10), support_edge_set(sigma.matrix(), 1e-10));
    ++checked;
  }
}
