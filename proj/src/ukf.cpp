#include "kalman/ukf.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kalman/errors.hpp"

namespace kalman {

UkfWeights ukf_weights(double alpha, Eigen::Index state_dim) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("ukf_weights: alpha must be positive, got " +
                                std::to_string(alpha));
  }
  if (state_dim < 1) throw std::invalid_argument("ukf_weights: state dimension must be >= 1");
  const double a2 = alpha * alpha;
  UkfWeights weights;
  weights.alpha = alpha;
  weights.state_dim = state_dim;
  weights.w = Vector::Constant(2 * state_dim + 1, 1.0 / (2.0 * a2 * static_cast<double>(state_dim)));
  weights.w[0] = (a2 - 1.0) / a2;
  return weights;
}

Matrix sigma_points(const Vector& center, const SpdMatrix& scale, double alpha, int step) {
  const Eigen::Index n = center.size();
  if (scale.dim() != n) throw DimensionError("sigma_points: scale does not match center");
  if (!(alpha > 0.0)) throw std::invalid_argument("sigma_points: alpha must be positive");
  const Matrix spread =
      alpha * spd_sqrt_factor(SpdMatrix(static_cast<double>(n) * scale.matrix()), step);
  Matrix points(n, 2 * n + 1);
  points.col(0) = center;
  points.middleCols(1, n) = spread.colwise() + center;
  points.middleCols(n + 1, n) = (-spread).colwise() + center;
  return points;
}

PropagatedSigma propagate_sigma(const SystemModel& model, const Matrix& points, const Vector& u,
                                int k) {
  const Eigen::Index count = points.cols();
  PropagatedSigma out{Matrix(model.state_dim, count), Matrix(model.output_dim, count)};
  for (Eigen::Index i = 0; i < count; ++i) {
    out.states.col(i) = step_dynamics(model, points.col(i), u, k);
    out.outputs.col(i) = measure(model, out.states.col(i), k + 1);
  }
  if (!out.states.allFinite() || !out.outputs.allFinite()) {
    throw FilterDiverged("sigma point propagation produced non-finite values", k + 1);
  }
  return out;
}

Matrix deviations(const Matrix& m, const UkfWeights& weights) {
  if (m.cols() != weights.w.size()) {
    throw DimensionError("deviations: expected " + std::to_string(weights.w.size()) +
                         " columns, got " + std::to_string(m.cols()));
  }
  const Vector mean = m * weights.w;
  return m.colwise() - mean;
}

UnscentedCovariances ukf_covariances(const Matrix& x_dev, const Matrix& y_dev,
                                     const UkfWeights& weights, const SpdMatrix& q,
                                     const SpdMatrix& r) {
  if (x_dev.cols() != weights.w.size() || y_dev.cols() != weights.w.size()) {
    throw DimensionError("ukf_covariances: deviation matrices must have 2l_x+1 columns");
  }
  if (q.dim() != x_dev.rows() || r.dim() != y_dev.rows()) {
    throw DimensionError("ukf_covariances: noise covariance dimensions do not match");
  }
  const auto wd = weights.diag();
  return {SpdMatrix(x_dev * wd * x_dev.transpose() + q.matrix()),
          SpdMatrix(y_dev * wd * y_dev.transpose() + r.matrix()),
          x_dev * wd * y_dev.transpose()};
}

SigmaSet unscented_transform(const SystemModel& model, const Vector& center,
                             const SpdMatrix& scale, const Vector& u, int k, double alpha) {
  SigmaSet set;
  set.weights = ukf_weights(alpha, model.state_dim);
  set.points = sigma_points(center, scale, alpha, k);
  auto propagated = propagate_sigma(model, set.points, u, k);
  set.propagated = std::move(propagated.states);
  set.outputs = std::move(propagated.outputs);
  return set;
}

std::pair<StateEstimate, FilterStepRecord> ukf_step(const SystemModel& model,
                                                    const StateEstimate& est, const Vector& u,
                                                    const Vector& y, double alpha) {
  const int k = est.step;
  const SigmaSet set = unscented_transform(model, est.mean, est.cov, u, k, alpha);
  const auto cov = ukf_covariances(deviations(set.propagated, set.weights),
                                   deviations(set.outputs, set.weights), set.weights,
                                   model.Q(k), model.R(k + 1));
  return finish_step(set.propagated_mean(), cov.prior, cov.pz, cov.pez, y, set.output_mean(),
                     k + 1);
}

}  // namespace kalman
