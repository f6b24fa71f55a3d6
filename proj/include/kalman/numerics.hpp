#pragma once

#include <Eigen/Dense>

namespace kalman {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Symmetric covariance-like matrix. Construction symmetrizes the input;
/// positive definiteness is checked lazily by the factorizations below.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  SpdMatrix(const Matrix& m);  // NOLINT(google-explicit-constructor)

  static SpdMatrix identity(Eigen::Index n) { return SpdMatrix(Matrix::Identity(n, n)); }
  static SpdMatrix scaled_identity(Eigen::Index n, double s) {
    return SpdMatrix(s * Matrix::Identity(n, n));
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double trace() const { return m_.trace(); }

 private:
  Matrix m_;
};

/// Returns (M + Mᵀ)/2. Throws DimensionError for non-square input.
Matrix symmetrize(const Matrix& m);

/// Lower-triangular S with S·Sᵀ = M. On failure retries once with
/// M + εI, ε = 1e-12·trace(M)/n, then throws NotPositiveDefinite tagged with `step`.
Matrix spd_sqrt_factor(const SpdMatrix& m, int step = -1);

/// Solves M·X = B through the Cholesky factor (same jitter policy).
Matrix solve_spd(const SpdMatrix& m, const Matrix& b, int step = -1);

/// True iff the reciprocal 1-norm condition number of M is >= threshold.
bool rcond_check(const Matrix& m, double threshold = 1e-12);

/// Reciprocal 1-norm condition number, 0 for singular input.
double rcond(const Matrix& m);

/// Factor L with L·Lᵀ = M for symmetric positive semidefinite M (zero or
/// rank-deficient allowed). Used only to colour Gaussian noise draws.
Matrix psd_factor(const Matrix& m);

/// ‖A − B‖_F / max(‖B‖_F, tiny).
double rel_frobenius(const Matrix& a, const Matrix& b);

}  // namespace kalman
