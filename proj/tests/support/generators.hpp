#pragma once

// Seeded random inputs for the property tests. Each trial gets its own
// seed so a failure can be replayed from the SCOPED_TRACE line alone.

#include "acyl/linalg.hpp"

#include <random>

namespace acyl::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  Mat gaussian(Index rows, Index cols) {
    Mat m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal();
    return m;
  }
  Vec gaussian_vec(Index n) { return gaussian(n, 1); }

  Mat orthogonal(Index n) {
    Eigen::HouseholderQR<Mat> qr(gaussian(n, n));
    return qr.householderQ() * Mat::Identity(n, n);
  }

  /// rows x cols with the given rank and singular values in [lo, hi].
  Mat with_rank(Index rows, Index cols, Index rank, double lo = 0.3, double hi = 3.0) {
    const Mat u = orthogonal(rows).leftCols(rank);
    const Mat v = orthogonal(cols).leftCols(rank);
    Vec s(rank);
    for (Index i = 0; i < rank; ++i) s(i) = uniform(lo, hi);
    return u * s.asDiagonal() * v.transpose();
  }

  /// Integer-valued rows x cols of rank <= k, exactly representable so its
  /// null singular values are exactly zero.
  Mat integer_low_rank(Index rows, Index cols, Index k) {
    Mat u(rows, k), v(k, cols);
    for (Index i = 0; i < u.size(); ++i) u.data()[i] = integer(-3, 3);
    for (Index i = 0; i < v.size(); ++i) v.data()[i] = integer(-3, 3);
    return u * v;
  }

  /// PSD n x n of rank k, nonzero eigenvalues in [lo, hi].
  Mat psd(Index n, Index k, double lo = 0.2, double hi = 5.0) {
    const Mat v = orthogonal(n).leftCols(k);
    Vec d(k);
    for (Index i = 0; i < k; ++i) d(i) = uniform(lo, hi);
    return v * d.asDiagonal() * v.transpose();
  }

  Mat symmetric(Index n, double lo, double hi) {
    const Mat v = orthogonal(n);
    Vec d(n);
    for (Index i = 0; i < n; ++i) d(i) = uniform(lo, hi);
    return v * d.asDiagonal() * v.transpose();
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Seed for trial `i` of a named suite.
inline std::uint64_t trial_seed(std::uint64_t suite, int i) { return suite * 1000003ULL + static_cast<std::uint64_t>(i); }

}  // namespace acyl::testing
