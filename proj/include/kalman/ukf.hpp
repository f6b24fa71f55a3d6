#pragma once

#include <utility>

#include "kalman/kf.hpp"
#include "kalman/numerics.hpp"
#include "kalman/statespace.hpp"

namespace kalman {

/// Unscented weights for spread α and state dimension l_x:
/// w[0] = (α²−1)/α², w[i] = 1/(2α²l_x) for i = 1..2l_x. They sum to one.
struct UkfWeights {
  double alpha = 1.5;
  Eigen::Index state_dim = 0;
  Vector w;

  Eigen::DiagonalMatrix<double, Eigen::Dynamic> diag() const { return w.asDiagonal(); }
};

UkfWeights ukf_weights(double alpha, Eigen::Index state_dim);

/// Sigma points and their images for one filter step.
struct SigmaSet {
  Matrix points;      // l_x × (2l_x+1), column 0 is the center
  Matrix propagated;  // f applied column-wise
  Matrix outputs;     // g applied to the propagated columns
  UkfWeights weights;

  Vector propagated_mean() const { return propagated * weights.w; }
  Vector output_mean() const { return outputs * weights.w; }
};

/// Columns [c, c + p_1..p_n, c − p_1..p_n] where p_i are the columns of
/// α·chol(n·scale).
Matrix sigma_points(const Vector& center, const SpdMatrix& scale, double alpha, int step = -1);

struct PropagatedSigma {
  Matrix states;
  Matrix outputs;
};

/// Applies f_k column-wise, then g_{k+1} to each image. Throws FilterDiverged
/// on non-finite results.
PropagatedSigma propagate_sigma(const SystemModel& model, const Matrix& points, const Vector& u,
                                int k);

/// M − (M·w)·1ᵀ: every column minus the weighted mean.
Matrix deviations(const Matrix& m, const UkfWeights& weights);

struct UnscentedCovariances {
  SpdMatrix prior;  // X̃ W X̃ᵀ + Q
  SpdMatrix pz;     // Ỹ W Ỹᵀ + R
  Matrix pez;       // X̃ W Ỹᵀ
};

UnscentedCovariances ukf_covariances(const Matrix& x_dev, const Matrix& y_dev,
                                     const UkfWeights& weights, const SpdMatrix& q,
                                     const SpdMatrix& r);

/// Draws sigma points around `center` with the given scale and pushes them
/// through the model from step k.
SigmaSet unscented_transform(const SystemModel& model, const Vector& center,
                             const SpdMatrix& scale, const Vector& u, int k, double alpha);

/// Classical UKF cycle consuming y_{k+1}.
std::pair<StateEstimate, FilterStepRecord> ukf_step(const SystemModel& model,
                                                    const StateEstimate& est, const Vector& u,
                                                    const Vector& y, double alpha = 1.5);

}  // namespace kalman
