#pragma once

// Seeded multivariate normal draws.
//
// Every standard normal is a pure function of (seed, stream, element):
// element e of a stream uses the Box-Muller pair built from SplitMix64
// outputs at counters 2*(e/2) and 2*(e/2)+1, taking the cosine branch for
// even e and the sine branch for odd e. Replication r of a Monte Carlo run
// uses stream r, so results do not depend on how replications are scheduled.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

#include "ggmgof/error.hpp"
#include "ggmgof/matrix_gen.hpp"

namespace ggm {

/// n observations of a p-vector, one row per observation.
class Dataset {
 public:
  explicit Dataset(Eigen::MatrixXd rows) : x_(std::move(rows)) {
    if (x_.rows() < 1 || x_.cols() < 1)
      throw InvalidArgument("dataset needs n >= 1 and p >= 1");
    if (!x_.allFinite()) throw InvalidArgument("dataset has non-finite entries");
  }

  Index n() const noexcept { return x_.rows(); }
  Index p() const noexcept { return x_.cols(); }
  const Eigen::MatrixXd& rows() const noexcept { return x_; }

 private:
  Eigen::MatrixXd x_;
};

namespace rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Key of stream `stream` under master `seed`.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed + kGolden) ^ (stream * 0xD1B54A32D192ED03ULL + kGolden));
}

/// SplitMix64 output at position `counter` of the stream.
inline std::uint64_t bits(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(key + (counter + 1) * kGolden);
}

/// Uniform on (0, 1], 53-bit resolution.
inline double uniform_open0(std::uint64_t b) noexcept {
  return static_cast<double>((b >> 11) + 1) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by 128-bit multiply-shift.
inline std::uint64_t below(std::uint64_t b, std::uint64_t bound) noexcept {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(b) * bound) >> 64);
}

inline double standard_normal(std::uint64_t key, std::uint64_t element) noexcept {
  const std::uint64_t pair = element >> 1;
  const double u1 = uniform_open0(bits(key, 2 * pair));
  const double u2 = uniform_open0(bits(key, 2 * pair + 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (element & 1U) ? r * std::sin(angle) : r * std::cos(angle);
}

/// n x p matrix of independent standard normals, element index row*p + col.
inline Eigen::MatrixXd standard_normal_matrix(Index n, Index p,
                                              std::uint64_t key) {
  Eigen::MatrixXd z(n, p);
  const auto cols = static_cast<std::uint64_t>(p);
  const auto total = static_cast<std::uint64_t>(n) * cols;
  for (std::uint64_t e = 0; e < total; e += 2) {
    const double u1 = uniform_open0(bits(key, e));
    const double u2 = uniform_open0(bits(key, e + 1));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    z(static_cast<Index>(e / cols), static_cast<Index>(e % cols)) = r * std::cos(angle);
    if (e + 1 < total)
      z(static_cast<Index>((e + 1) / cols), static_cast<Index>((e + 1) % cols)) =
          r * std::sin(angle);
  }
  return z;
}

}  // namespace rng

/// Holds the Cholesky factor so repeated draws from one covariance skip
/// refactorization.
class MvnSampler {
 public:
  explicit MvnSampler(const CovarianceMatrix& sigma) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma.matrix());
    if (llt.info() != Eigen::Success)
      throw NotPositiveDefinite("covariance Cholesky factorization failed",
                                detail::min_eigenvalue(sigma.matrix()));
    upper_ = llt.matrixU();
  }

  Index p() const noexcept { return upper_.rows(); }

  /// X = Z L^T with Z drawn from stream `stream` of `seed`.
  Dataset sample(Index n, std::uint64_t seed, std::uint64_t stream = 0) const {
    if (n < 1) throw InvalidArgument("sample size n must be >= 1");
    const Eigen::MatrixXd z =
        rng::standard_normal_matrix(n, p(), rng::stream_key(seed, stream));
    Eigen::MatrixXd x(n, p());
    x.noalias() = z * upper_.triangularView<Eigen::Upper>();
    return Dataset(std::move(x));
  }

 private:
  Eigen::MatrixXd upper_;  // L^T
};

inline Dataset sample_mvn(const CovarianceMatrix& sigma, Index n,
                          std::uint64_t seed, std::uint64_t stream = 0) {
  return MvnSampler(sigma).sample(n, seed, stream);
}

}  // namespace ggm
