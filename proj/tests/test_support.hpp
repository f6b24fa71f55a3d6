#pragma once

#include <random>

#include "kalman/numerics.hpp"

namespace kalman::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

/// Well-conditioned random SPD matrix.
inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index n, double floor = 0.1) {
  const Matrix l = random_matrix(rng, n, n);
  return l * l.transpose() + floor * Matrix::Identity(n, n);
}

/// Joseph-form covariance for gain K: (I − KC) P (I − KC)ᵀ + K R Kᵀ.
inline Matrix joseph_cov(const Matrix& prior, const Matrix& gain, const Matrix& c,
                         const Matrix& r) {
  const Matrix i_kc = Matrix::Identity(prior.rows(), prior.cols()) - gain * c;
  return i_kc * prior * i_kc.transpose() + gain * r * gain.transpose();
}

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace kalman::testing
