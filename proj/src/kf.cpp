#include "kalman/kf.hpp"

#include <string>

#include "kalman/errors.hpp"

namespace kalman {

Prior kf_predict(const LinearSystem& sys, const StateEstimate& est, const Vector& u) {
  const int k = est.step;
  const Matrix a = sys.A(k);
  if (a.cols() != est.mean.size() || est.cov.dim() != est.mean.size()) {
    throw DimensionError("kf_predict: estimate does not match A");
  }
  Vector mean = a * est.mean;
  if (u.size() > 0) {
    const Matrix b = sys.input_matrix(k);
    if (b.cols() != u.size()) throw DimensionError("kf_predict: input does not match B");
    mean += b * u;
  }
  const SpdMatrix q = sys.Q(k);
  return {std::move(mean), SpdMatrix(a * est.cov.matrix() * a.transpose() + q.matrix())};
}

Innovation kf_innovation(const LinearSystem& sys, const SpdMatrix& prior_cov, int k) {
  const Matrix c = sys.C(k);
  if (c.cols() != prior_cov.dim()) throw DimensionError("kf_innovation: C does not match P");
  Matrix pez = prior_cov.matrix() * c.transpose();
  return {SpdMatrix(c * pez + sys.R(k).matrix()), std::move(pez)};
}

Matrix kf_gain(const SpdMatrix& pz, const Matrix& pez, int step) {
  if (pez.cols() != pz.dim()) throw DimensionError("kf_gain: P_ez columns must match P_z");
  // K P_z = P_ez  <=>  P_z Kᵀ = P_ezᵀ (P_z symmetric)
  return solve_spd(pz, pez.transpose(), step).transpose();
}

Posterior kf_update(const Vector& prior_mean, const SpdMatrix& prior_cov, const Matrix& gain,
                    const Matrix& pez, const Vector& y, const Vector& predicted_y, int step) {
  if (gain.rows() != prior_mean.size() || gain.cols() != y.size() ||
      predicted_y.size() != y.size() || pez.rows() != gain.rows() || pez.cols() != gain.cols()) {
    throw DimensionError("kf_update: inconsistent shapes");
  }
  Posterior post{prior_mean + gain * (y - predicted_y),
                 SpdMatrix(prior_cov.matrix() - gain * pez.transpose())};
  if (!post.mean.allFinite()) throw FilterDiverged("posterior mean is not finite", step);
  spd_sqrt_factor(post.cov, step);
  return post;
}

SpdMatrix evaluate_gain_cov(const SpdMatrix& prior_cov, const SpdMatrix& pz, const Matrix& pez,
                            const Matrix& gain) {
  const Matrix kpez = gain * pez.transpose();
  return SpdMatrix(prior_cov.matrix() + gain * pz.matrix() * gain.transpose() - kpez -
                   kpez.transpose());
}

std::pair<StateEstimate, FilterStepRecord> finish_step(const Vector& prior_mean,
                                                       const SpdMatrix& prior_cov,
                                                       const SpdMatrix& pz, const Matrix& pez,
                                                       const Vector& y,
                                                       const Vector& predicted_y, int step) {
  Matrix gain = kf_gain(pz, pez, step);
  Posterior post = kf_update(prior_mean, prior_cov, gain, pez, y, predicted_y, step);

  FilterStepRecord rec;
  rec.prior_mean = prior_mean;
  rec.prior_cov = prior_cov;
  rec.gain = std::move(gain);
  rec.innovation_cov = pz;
  rec.cross_cov = pez;
  rec.posterior_mean = post.mean;
  rec.posterior_cov = post.cov;
  rec.step = step;
  rec.predicted_output = predicted_y;
  rec.measurement = y;
  return {StateEstimate{std::move(post.mean), std::move(post.cov), step}, std::move(rec)};
}

std::pair<StateEstimate, FilterStepRecord> kf_step(const LinearSystem& sys,
                                                   const StateEstimate& est, const Vector& u,
                                                   const Vector& y) {
  const int next = est.step + 1;
  Prior prior = kf_predict(sys, est, u);
  Innovation inn = kf_innovation(sys, prior.cov, next);
  const Vector predicted_y = sys.C(next) * prior.mean;
  return finish_step(prior.mean, prior.cov, inn.pz, inn.pez, y, predicted_y, next);
}

}  // namespace kalman
