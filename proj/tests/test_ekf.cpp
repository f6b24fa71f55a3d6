#include <doctest.h>

#include <random>

#include "kalman/ekf.hpp"
#include "kalman/kf.hpp"
#include "kalman/propositions.hpp"
#include "test_support.hpp"

using namespace kalman;
using kalman::testing::random_matrix;
using kalman::testing::random_spd;
using kalman::testing::vec;

TEST_CASE("EKF reduces to the KF on linear systems") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const LinearSystem sys = random_linear_system(11, trial);
    const SystemModel model = sys.to_model();
    const Eigen::Index n = sys.state_dim();
    StateEstimate kf{random_matrix(rng, n, 1), SpdMatrix(random_spd(rng, n)), 0};
    StateEstimate ekf = kf;
    for (int k = 0; k < 20; ++k) {
      const Vector y = random_matrix(rng, sys.output_dim(), 1);
      auto [kf_next, kf_rec] = kf_step(sys, kf, Vector(), y);
      auto [ekf_next, ekf_rec] = ekf_step(model, ekf, Vector(), y);
      CHECK(rel_frobenius(ekf_rec.gain, kf_rec.gain) < 1e-12);
      CHECK(rel_frobenius(ekf_next.cov.matrix(), kf_next.cov.matrix()) < 1e-12);
      CHECK((ekf_next.mean - kf_next.mean).norm() <= 1e-10 * (1.0 + kf_next.mean.norm()));
      kf = kf_next;
      ekf = ekf_next;
    }
  }
}

TEST_CASE("EKF prior on Lorenz uses the Jacobian at the estimate") {
  const SystemModel m = make_lorenz();
  const StateEstimate est{vec({1, 1, 1}), SpdMatrix::identity(3), 0};
  const auto [post, rec] = ekf_step(m, est, Vector(), vec({1.3}));
  const Matrix a = m.dynamics_jacobian(est.mean, Vector(), 0);
  CHECK(rel_frobenius(rec.prior_cov.matrix(), a * a.transpose() + 0.01 * Matrix::Identity(3, 3)) <
        1e-14);
  CHECK((rec.prior_mean - vec({1, 1.26, 1 - 0.01 * (8.0 / 3.0 - 1.0)})).norm() < 1e-14);
  CHECK(rec.predicted_output[0] == rec.prior_mean[1]);
  CHECK(post.step == 1);
  CHECK(rec.step == 1);
}

TEST_CASE("EKF uses the measurement Jacobian at the prior mean") {
  // g(x) = x², so C at the prior mean 2·x̂⁻ differs from C at x̂.
  SystemModel m;
  m.name = "square";
  m.state_dim = 1;
  m.output_dim = 1;
  m.dynamics = [](const Vector& x, const Vector&, int) -> Vector { return 2.0 * x; };
  m.measurement = [](const Vector& x, int) -> Vector { return x.array().square(); };
  m.dynamics_jacobian = [](const Vector&, const Vector&, int) -> Matrix {
    return Matrix::Constant(1, 1, 2.0);
  };
  m.measurement_jacobian = [](const Vector& x, int) -> Matrix { return 2.0 * x; };
  m.process_noise = constant_covariance(SpdMatrix::scaled_identity(1, 0.5));
  m.measurement_noise = constant_covariance(SpdMatrix::scaled_identity(1, 0.1));
  const StateEstimate est{vec({1.0}), SpdMatrix::identity(1), 0};
  const auto [post, rec] = ekf_step(m, est, Vector(), vec({4.0}));
  // x̂⁻ = 2, P⁻ = 4.5, C = 4, P_z = 72.1, P_ez = 18.
  CHECK(rec.prior_mean[0] == 2.0);
  CHECK(rec.prior_cov.matrix()(0, 0) == doctest::Approx(4.5));
  CHECK(rec.innovation_cov.matrix()(0, 0) == doctest::Approx(72.1));
  CHECK(rec.cross_cov(0, 0) == doctest::Approx(18.0));
  CHECK(rec.predicted_output[0] == 4.0);
  CHECK(post.mean[0] == 2.0);
}
