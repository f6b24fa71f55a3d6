#pragma once

#include <utility>

#include "kalman/kf.hpp"
#include "kalman/statespace.hpp"
#include "kalman/ukf.hpp"

namespace kalman {

/// Sigma scale of the A-variant: P_{k|k} + A_k⁻¹ Q_k A_k⁻ᵀ, with A_k the
/// dynamics Jacobian at x̂_{k|k}. Throws SingularDynamicsJacobian when the
/// reciprocal condition number of A_k is below 1e-12.
SpdMatrix eukfa_sigma_scale(const SystemModel& model, const StateEstimate& est, const Vector& u,
                            int k);

/// A-variant cycle: sigma points from the inflated scale, prior covariance
/// without the additive Q, innovation terms as in the UKF.
std::pair<StateEstimate, FilterStepRecord> eukfa_step(const SystemModel& model,
                                                      const StateEstimate& est, const Vector& u,
                                                      const Vector& y, double alpha = 1.5);

/// C-variant cycle: UKF sigma points; P_z gains C Q Cᵀ and P_ez gains Q Cᵀ,
/// with C the measurement Jacobian at the propagated sigma mean.
std::pair<StateEstimate, FilterStepRecord> eukfc_step(const SystemModel& model,
                                                      const StateEstimate& est, const Vector& u,
                                                      const Vector& y, double alpha = 1.5);

}  // namespace kalman
