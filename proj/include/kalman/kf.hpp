#pragma once

#include <utility>

#include "kalman/numerics.hpp"
#include "kalman/statespace.hpp"

namespace kalman {

/// Quantities produced by one predict/update cycle of any Kalman-type filter.
struct KfStep {
  Vector prior_mean;
  SpdMatrix prior_cov;
  Matrix gain;               // l_x × l_y
  SpdMatrix innovation_cov;  // P_z
  Matrix cross_cov;          // P_ez, l_x × l_y
  Vector posterior_mean;
  SpdMatrix posterior_cov;
};

/// KfStep plus the bookkeeping the harness needs.
struct FilterStepRecord : KfStep {
  int step = 0;               // index of the posterior, k+1
  Vector predicted_output;    // what the innovation was formed against
  Vector measurement;
};

struct Prior {
  Vector mean;
  SpdMatrix cov;
};

struct Innovation {
  SpdMatrix pz;
  Matrix pez;
};

struct Posterior {
  Vector mean;
  SpdMatrix cov;
};

/// x̂⁻ = A x̂ + B u, P⁻ = A P Aᵀ + Q.
Prior kf_predict(const LinearSystem& sys, const StateEstimate& est, const Vector& u);

/// P_z = C P⁻ Cᵀ + R and P_ez = P⁻ Cᵀ at measurement step `k`.
Innovation kf_innovation(const LinearSystem& sys, const SpdMatrix& prior_cov, int k);

/// K with K·P_z = P_ez.
Matrix kf_gain(const SpdMatrix& pz, const Matrix& pez, int step = -1);

/// Mean += K(y − ŷ); covariance = P⁻ − K P_ezᵀ. The result is checked for
/// positive definiteness.
Posterior kf_update(const Vector& prior_mean, const SpdMatrix& prior_cov, const Matrix& gain,
                    const Matrix& pez, const Vector& y, const Vector& predicted_y,
                    int step = -1);

/// Error covariance achieved by an arbitrary gain K under the true
/// second moments: P⁻ + K P_z Kᵀ − K P_ezᵀ − P_ez Kᵀ.
SpdMatrix evaluate_gain_cov(const SpdMatrix& prior_cov, const SpdMatrix& pz, const Matrix& pez,
                            const Matrix& gain);

/// One full KF cycle consuming y_{k+1}.
std::pair<StateEstimate, FilterStepRecord> kf_step(const LinearSystem& sys,
                                                   const StateEstimate& est, const Vector& u,
                                                   const Vector& y);

/// Gain, posterior and record for a prior/innovation triple. Shared by every
/// filter that ends in the covariance-form update.
std::pair<StateEstimate, FilterStepRecord> finish_step(const Vector& prior_mean,
                                                       const SpdMatrix& prior_cov,
                                                       const SpdMatrix& pz, const Matrix& pez,
                                                       const Vector& y,
                                                       const Vector& predicted_y, int step);

}  // namespace kalman
