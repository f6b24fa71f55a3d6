#include "kalman/ekf.hpp"

#include "kalman/errors.hpp"

namespace kalman {

std::pair<StateEstimate, FilterStepRecord> ekf_step(const SystemModel& model,
                                                    const StateEstimate& est, const Vector& u,
                                                    const Vector& y) {
  const int k = est.step;
  const int next = k + 1;
  const Matrix a = jacobian_dynamics(model, est.mean, u, k);
  const Vector prior_mean = step_dynamics(model, est.mean, u, k);
  if (!prior_mean.allFinite()) throw FilterDiverged("EKF prior mean is not finite", next);
  const SpdMatrix prior_cov(a * est.cov.matrix() * a.transpose() + model.Q(k).matrix());

  const Matrix c = jacobian_measurement(model, prior_mean, next);
  const Matrix pez = prior_cov.matrix() * c.transpose();
  const SpdMatrix pz(c * pez + model.R(next).matrix());
  const Vector predicted_y = measure(model, prior_mean, next);
  return finish_step(prior_mean, prior_cov, pz, pez, y, predicted_y, next);
}

}  // namespace kalman
