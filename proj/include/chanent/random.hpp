#pragma once

#include <cstdint>
#include <random>

#include "linalg.hpp"

namespace chanent {

using Rng = std::mt19937_64;

// Independent stream for (seed, index). Streams for different indices do not
// depend on scheduling order.
inline Rng make_rng(std::uint64_t seed, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x5eedu};
  return Rng(seq);
}

// Entries i.i.d. complex Gaussian with E|z|^2 = 1.
inline Matrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      double re = g(rng);
      double im = g(rng);
      m(i, j) = cplx(re, im);
    }
  return m;
}

// Haar-distributed isometry (rows >= cols) from the QR factorisation of a
// Ginibre matrix with the phases of R absorbed.
inline Matrix haar_isometry(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows < cols) throw DimensionError("haar_isometry: rows < cols");
  Matrix g = ginibre(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
  Matrix r = qr.matrixQR().topRows(g.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    cplx d = r(k, k);
    cplx ph = std::abs(d) > 0 ? d / std::abs(d) : cplx(1.0);
    q.col(k) *= ph;
  }
  return q;
}

inline Matrix haar_unitary(std::size_t d, Rng& rng) { return haar_isometry(d, d, rng); }

// Full-rank mixed state from the induced measure (Ginibre G, rho = GG^+/tr).
inline Matrix random_state(std::size_t d, Rng& rng, std::size_t env = 0) {
  Matrix g = ginibre(d, env == 0 ? d : env, rng);
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline Matrix random_pure_state(std::size_t d, Rng& rng) {
  Matrix v = ginibre(d, 1, rng);
  v /= v.norm();
  return v * v.adjoint();
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace chanent
