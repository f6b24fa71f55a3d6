#include "kalman/eukf.hpp"

#include "kalman/errors.hpp"

namespace kalman {

namespace {

constexpr double kMinDynamicsRcond = 1e-12;

}  // namespace

SpdMatrix eukfa_sigma_scale(const SystemModel& model, const StateEstimate& est, const Vector& u,
                            int k) {
  const Matrix a = jacobian_dynamics(model, est.mean, u, k);
  if (!rcond_check(a, kMinDynamicsRcond)) {
    throw SingularDynamicsJacobian("dynamics Jacobian is numerically singular", k);
  }
  // A⁻¹ Q A⁻ᵀ via two solves: Z = A⁻¹ Q, then (A⁻¹ Zᵀ)ᵀ.
  const Eigen::PartialPivLU<Matrix> lu(a);
  const Matrix z = lu.solve(model.Q(k).matrix());
  const Matrix inflation = lu.solve(z.transpose()).transpose();
  return SpdMatrix(est.cov.matrix() + inflation);
}

std::pair<StateEstimate, FilterStepRecord> eukfa_step(const SystemModel& model,
                                                      const StateEstimate& est, const Vector& u,
                                                      const Vector& y, double alpha) {
  const int k = est.step;
  const SpdMatrix scale = eukfa_sigma_scale(model, est, u, k);
  const SigmaSet set = unscented_transform(model, est.mean, scale, u, k, alpha);
  const auto zero_q = SpdMatrix(Matrix::Zero(model.state_dim, model.state_dim));
  const auto cov = ukf_covariances(deviations(set.propagated, set.weights),
                                   deviations(set.outputs, set.weights), set.weights, zero_q,
                                   model.R(k + 1));
  return finish_step(set.propagated_mean(), cov.prior, cov.pz, cov.pez, y, set.output_mean(),
                     k + 1);
}

std::pair<StateEstimate, FilterStepRecord> eukfc_step(const SystemModel& model,
                                                      const StateEstimate& est, const Vector& u,
                                                      const Vector& y, double alpha) {
  const int k = est.step;
  const SigmaSet set = unscented_transform(model, est.mean, est.cov, u, k, alpha);
  const SpdMatrix q = model.Q(k);
  const auto cov = ukf_covariances(deviations(set.propagated, set.weights),
                                   deviations(set.outputs, set.weights), set.weights, q,
                                   model.R(k + 1));
  const Vector prior_mean = set.propagated_mean();
  const Matrix c = jacobian_measurement(model, prior_mean, k + 1);
  const Matrix qct = q.matrix() * c.transpose();
  const SpdMatrix pz(cov.pz.matrix() + c * qct);
  const Matrix pez = cov.pez + qct;
  return finish_step(prior_mean, cov.prior, pz, pez, y, set.output_mean(), k + 1);
}

}  // namespace kalman
