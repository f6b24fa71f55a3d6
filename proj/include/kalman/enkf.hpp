#pragma once

#include <cstdint>

#include "kalman/kf.hpp"
#include "kalman/statespace.hpp"

namespace kalman {

/// Stochastic ensemble. Member draws come from per-member, per-step streams
/// keyed on `seed`, so results are independent of the thread count.
struct Ensemble {
  Matrix members;  // l_x × N
  std::uint64_t seed = 0;
  int step = 0;

  Eigen::Index size() const { return members.cols(); }
  Vector mean() const;
  /// Sample covariance with divisor N − 1.
  SpdMatrix covariance() const;
};

/// N draws from N(est.mean, est.cov).
Ensemble enkf_init(const StateEstimate& est, Eigen::Index size, std::uint64_t seed);

struct EnkfResult {
  Ensemble ensemble;
  StateEstimate estimate;
  FilterStepRecord record;
};

/// Perturbed-observation EnKF cycle consuming y_{k+1}. Each member is pushed
/// through f with its own N(0, Q) draw; the gain is P̂_ez (P̂_yy + R)⁻¹ from
/// sample moments; each member assimilates its own N(0, R)-perturbed copy of y.
EnkfResult enkf_step(const SystemModel& model, const Ensemble& ens, const Vector& u,
                     const Vector& y, int threads = 1);

}  // namespace kalman
