#include "kalman/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kalman/errors.hpp"

namespace kalman {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": expected square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

Eigen::LLT<Matrix> factor_with_jitter(const Matrix& m, int step) {
  require_square(m, "spd factorization");
  if (!m.allFinite()) {
    throw NotPositiveDefinite("matrix has non-finite entries", step);
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) return llt;

  const auto n = m.rows();
  const double eps = n > 0 ? 1e-12 * m.trace() / static_cast<double>(n) : 0.0;
  if (eps > 0.0) {
    llt.compute(m + eps * Matrix::Identity(n, n));
    if (llt.info() == Eigen::Success) return llt;
  }
  throw NotPositiveDefinite("covariance is not positive definite", step);
}

}  // namespace

SpdMatrix::SpdMatrix(const Matrix& m) : m_(symmetrize(m)) {}

Matrix symmetrize(const Matrix& m) {
  require_square(m, "symmetrize");
  return 0.5 * (m + m.transpose());
}

Matrix spd_sqrt_factor(const SpdMatrix& m, int step) {
  return factor_with_jitter(m.matrix(), step).matrixL();
}

Matrix solve_spd(const SpdMatrix& m, const Matrix& b, int step) {
  if (b.rows() != m.dim()) {
    throw DimensionError("solve_spd: right-hand side has " + std::to_string(b.rows()) +
                         " rows, matrix is " + std::to_string(m.dim()));
  }
  return factor_with_jitter(m.matrix(), step).solve(b);
}

double rcond(const Matrix& m) {
  require_square(m, "rcond");
  if (m.size() == 0) return 1.0;
  if (!m.allFinite()) return 0.0;
  const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
  if (norm == 0.0) return 0.0;
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) return 0.0;
  const Matrix inv = lu.inverse();
  const double inv_norm = inv.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(inv_norm) || inv_norm == 0.0) return 0.0;
  return 1.0 / (norm * inv_norm);
}

bool rcond_check(const Matrix& m, double threshold) { return rcond(m) >= threshold; }

Matrix psd_factor(const Matrix& m) {
  require_square(m, "psd_factor");
  const auto n = m.rows();
  if (m.isZero(0.0)) return Matrix::Zero(n, n);
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

double rel_frobenius(const Matrix& a, const Matrix& b) {
  const double denom = std::max(b.norm(), std::numeric_limits<double>::min());
  return (a - b).norm() / denom;
}

}  // namespace kalman
