#pragma once

#include <functional>
#include <optional>
#include <string>

#include "kalman/numerics.hpp"

namespace kalman {

/// x_{k+1} = f_k(x_k, u_k) + w_k,  y_k = g_k(x_k) + v_k,
/// w_k ~ N(0, Q_k), v_k ~ N(0, R_k).
struct SystemModel {
  using DynamicsFn = std::function<Vector(const Vector& x, const Vector& u, int k)>;
  using MeasureFn = std::function<Vector(const Vector& x, int k)>;
  using DynamicsJacobianFn = std::function<Matrix(const Vector& x, const Vector& u, int k)>;
  using MeasureJacobianFn = std::function<Matrix(const Vector& x, int k)>;
  using CovarianceFn = std::function<SpdMatrix(int k)>;

  std::string name;
  Eigen::Index state_dim = 0;
  Eigen::Index input_dim = 0;
  Eigen::Index output_dim = 0;

  DynamicsFn dynamics;
  MeasureFn measurement;
  DynamicsJacobianFn dynamics_jacobian;      // optional
  MeasureJacobianFn measurement_jacobian;    // optional
  CovarianceFn process_noise;
  CovarianceFn measurement_noise;

  /// Central finite differences stand in for missing analytic Jacobians.
  bool allow_fd_jacobian = true;

  SpdMatrix Q(int k) const { return process_noise(k); }
  SpdMatrix R(int k) const { return measurement_noise(k); }

  /// Zero input of the declared dimension.
  Vector zero_input() const { return Vector::Zero(input_dim); }
};

SystemModel::CovarianceFn constant_covariance(SpdMatrix m);

/// Linear time-varying system x_{k+1} = A_k x_k + B_k u_k + w_k, y_k = C_k x_k + v_k.
struct LinearSystem {
  using MatrixFn = std::function<Matrix(int k)>;

  std::string name = "linear";
  MatrixFn A;
  MatrixFn B;  // may be empty: treated as l_x × 0
  MatrixFn C;
  SystemModel::CovarianceFn Q;
  SystemModel::CovarianceFn R;

  /// Time-invariant system; an empty B means "no inputs".
  static LinearSystem constant(const Matrix& a, const Matrix& b, const Matrix& c,
                               const SpdMatrix& q, const SpdMatrix& r,
                               std::string name = "linear");

  Eigen::Index state_dim() const;
  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;
  Matrix input_matrix(int k) const;

  /// Exact conversion: f = Ax + Bu, g = Cx, Jacobians A and C.
  SystemModel to_model() const;
};

struct StateEstimate {
  Vector mean;
  SpdMatrix cov;
  int step = 0;
};

Vector step_dynamics(const SystemModel& model, const Vector& x, const Vector& u, int k);
Vector measure(const SystemModel& model, const Vector& x, int k);

/// ∂f/∂x at (x, u, k); analytic when attached, otherwise finite differences.
Matrix jacobian_dynamics(const SystemModel& model, const Vector& x, const Vector& u, int k);
/// ∂g/∂x at (x, k).
Matrix jacobian_measurement(const SystemModel& model, const Vector& x, int k);

/// Central-difference Jacobian. `h <= 0` selects 1e-6·max(1, ‖x‖∞).
Matrix jacobian_fd(const std::function<Vector(const Vector&)>& fn, const Vector& x,
                   double h = 0.0);

/// Forward-Euler Van der Pol oscillator, C = [1 0], Q = q·I₂, R = r.
SystemModel make_vdp(double ts = 0.01, double mu = 1.0, double q = 0.01, double r = 1e-4);

/// Forward-Euler Lorenz-63 (σ=10, ρ=28, β=8/3), C = [0 1 0], Q = q·I₃, R = r.
SystemModel make_lorenz(double ts = 0.01, double q = 0.01, double r = 1e-4);

}  // namespace kalman
