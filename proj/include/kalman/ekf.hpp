#pragma once

#include <utility>

#include "kalman/kf.hpp"
#include "kalman/statespace.hpp"

namespace kalman {

/// Extended Kalman filter cycle consuming y_{k+1}.
///
/// The dynamics Jacobian is taken at x̂_{k|k} and the prior mean is the full
/// nonlinear image f(x̂_{k|k}, u). The measurement Jacobian is taken at the
/// prior mean, and the innovation is formed against g(prior mean).
std::pair<StateEstimate, FilterStepRecord> ekf_step(const SystemModel& model,
                                                    const StateEstimate& est, const Vector& u,
                                                    const Vector& y);

}  // namespace kalman
