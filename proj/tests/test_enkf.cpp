#include <doctest.h>

#include "kalman/enkf.hpp"
#include "kalman/errors.hpp"
#include "kalman/harness.hpp"
#include "kalman/kf.hpp"
#include "test_support.hpp"

using namespace kalman;
using kalman::testing::vec;

TEST_CASE("enkf_init draws from the requested Gaussian") {
  const Matrix p = (Matrix(2, 2) << 2.0, 0.6, 0.6, 0.5).finished();
  const StateEstimate est{vec({1, -3}), SpdMatrix(p), 0};
  const Ensemble ens = enkf_init(est, 100000, 5);
  CHECK(ens.size() == 100000);
  CHECK(ens.step == 0);
  CHECK((ens.mean() - est.mean).norm() < 0.02);
  CHECK(rel_frobenius(ens.covariance().matrix(), p) < 0.02);
  CHECK_THROWS_AS(enkf_init(est, 1, 5), std::invalid_argument);
}

TEST_CASE("sample covariance uses N − 1") {
  Ensemble ens;
  ens.members = (Matrix(1, 3) << 1.0, 2.0, 3.0).finished();
  CHECK(ens.mean()[0] == 2.0);
  CHECK(ens.covariance().matrix()(0, 0) == 1.0);
}

TEST_CASE("EnKF tracks the KF covariance on a linear system") {
  const LinearSystem sys = example2_system();
  const SystemModel model = sys.to_model();
  const Trajectory truth = simulate_truth(model, Vector::Ones(2), 100, 3);
  StateEstimate kf{Vector::Ones(2), SpdMatrix::identity(2), 0};
  Ensemble ens = enkf_init(kf, 50000, 3);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Vector& y = truth.measurements[static_cast<std::size_t>(k + 1)];
    kf = kf_step(sys, kf, Vector(), y).first;
    EnkfResult r = enkf_step(model, ens, Vector(), y);
    ens = std::move(r.ensemble);
    const double rel = std::abs(r.estimate.cov.trace() - kf.cov.trace()) / kf.cov.trace();
    if (k + 1 >= 10) worst = std::max(worst, rel);
    if (k + 1 == 50) CHECK(rel < 0.02);
    CHECK(r.estimate.step == k + 1);
  }
  CHECK(worst < 0.05);
}

TEST_CASE("EnKF results do not depend on the thread count") {
  const SystemModel model = make_lorenz();
  const StateEstimate est{vec({1, 1, 1}), SpdMatrix::identity(3), 0};
  const Ensemble start = enkf_init(est, 2000, 11);
  Ensemble a = start, b = start;
  for (int k = 0; k < 20; ++k) {
    const Vector y = vec({1.0 + 0.1 * k});
    a = enkf_step(model, a, Vector(), y, 1).ensemble;
    b = enkf_step(model, b, Vector(), y, 4).ensemble;
  }
  CHECK(a.members == b.members);
}

TEST_CASE("huge measurement noise switches the update off") {
  const LinearSystem base = example2_system();
  const auto sys = LinearSystem::constant(base.A(0), Matrix(), base.C(0), base.Q(0),
                                          SpdMatrix::scaled_identity(1, 1e12));
  const StateEstimate est{Vector::Ones(2), SpdMatrix::identity(2), 0};
  const EnkfResult r = enkf_step(sys.to_model(), enkf_init(est, 5000, 2), Vector(), vec({100.0}));
  CHECK(r.record.gain.norm() < 1e-9);
  CHECK((r.record.posterior_mean - r.record.prior_mean).norm() < 1e-4);
}

TEST_CASE("mismatched measurement is rejected") {
  const StateEstimate est{vec({1, 1, 1}), SpdMatrix::identity(3), 0};
  CHECK_THROWS_AS(enkf_step(make_lorenz(), enkf_init(est, 10, 1), Vector(), vec({1, 2})),
                  DimensionError);
}
