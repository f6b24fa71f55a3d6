#include <doctest.h>

#include <random>

#include "kalman/errors.hpp"
#include "kalman/eukf.hpp"
#include "kalman/harness.hpp"
#include "kalman/kf.hpp"
#include "kalman/propositions.hpp"
#include "kalman/ukf.hpp"
#include "test_support.hpp"

using namespace kalman;
using kalman::testing::random_matrix;
using kalman::testing::random_spd;
using kalman::testing::vec;

namespace {

Matrix inverse2(const Matrix& a) {
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  return (Matrix(2, 2) << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0)).finished() / det;
}

void check_equivalent_to_kf(const LinearSystem& sys, std::mt19937_64& rng, double alpha, int steps) {
  const SystemModel m = sys.to_model();
  const Eigen::Index n = sys.state_dim();
  StateEstimate kf{random_matrix(rng, n, 1), SpdMatrix(random_spd(rng, n)), 0};
  StateEstimate a = kf, c = kf;
  double worst = 0.0;
  for (int k = 0; k < steps; ++k) {
    const Vector y = random_matrix(rng, sys.output_dim(), 1);
    const auto [kn, kr] = kf_step(sys, kf, Vector(), y);
    const auto [an, ar] = eukfa_step(m, a, Vector(), y, alpha);
    const auto [cn, cr] = eukfc_step(m, c, Vector(), y, alpha);
    worst = std::max({worst, rel_frobenius(ar.gain, kr.gain), rel_frobenius(cr.gain, kr.gain),
                      rel_frobenius(an.cov.matrix(), kn.cov.matrix()),
                      rel_frobenius(cn.cov.matrix(), kn.cov.matrix())});
    kf = kn;
    a = an;
    c = cn;
  }
  CAPTURE(sys.name);
  CAPTURE(alpha);
  CHECK(worst < 1e-9);
}

}  // namespace

TEST_CASE("eukfa_sigma_scale") {
  SUBCASE("first example by hand") {
    const LinearSystem sys = example1_system();
    const StateEstimate est{Vector::Ones(2), SpdMatrix::identity(2), 0};
    const Matrix ainv = inverse2(sys.A(0));
    const Matrix expected = Matrix::Identity(2, 2) + ainv * ainv.transpose();
    CHECK(rel_frobenius(eukfa_sigma_scale(sys.to_model(), est, Vector(), 0).matrix(), expected) <
          1e-13);
  }
  SUBCASE("identity dynamics adds Q") {
    const auto sys = LinearSystem::constant(Matrix::Identity(3, 3), Matrix(), Matrix::Ones(1, 3),
                                            SpdMatrix::scaled_identity(3, 0.2),
                                            SpdMatrix::identity(1));
    const StateEstimate est{Vector::Zero(3), SpdMatrix::identity(3), 0};
    CHECK(rel_frobenius(eukfa_sigma_scale(sys.to_model(), est, Vector(), 0).matrix(),
                        1.2 * Matrix::Identity(3, 3)) < 1e-15);
  }
  SUBCASE("singular dynamics are rejected") {
    const Matrix a = (Matrix(2, 2) << 1, 2, 2, 4).finished();
    const auto sys = LinearSystem::constant(a, Matrix(), Matrix::Ones(1, 2),
                                            SpdMatrix::identity(2), SpdMatrix::identity(1));
    const StateEstimate est{Vector::Zero(2), SpdMatrix::identity(2), 5};
    try {
      eukfa_sigma_scale(sys.to_model(), est, Vector(), 5);
      FAIL("expected SingularDynamicsJacobian");
    } catch (const SingularDynamicsJacobian& e) {
      CHECK(e.step() == 5);
    }
  }
}

TEST_CASE("EUKF-A and EUKF-C reproduce the KF on linear systems") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const LinearSystem sys = random_linear_system(8, trial);
    for (double alpha : {1.0, 1.5, 3.0}) check_equivalent_to_kf(sys, rng, alpha, 30);
  }
  check_equivalent_to_kf(example2_system(), rng, 1.5, 50);
}

TEST_CASE("first example: both variants recover the KF trace") {
  const LinearSystem sys = example1_system();
  const StateEstimate est{Vector::Ones(2), SpdMatrix::identity(2), 0};
  const double kf = kf_step(sys, est, Vector(), vec({0})).first.cov.trace();
  CHECK(eukfa_step(sys.to_model(), est, Vector(), vec({0})).first.cov.trace() ==
        doctest::Approx(kf).epsilon(1e-12));
  CHECK(eukfc_step(sys.to_model(), est, Vector(), vec({0})).first.cov.trace() ==
        doctest::Approx(kf).epsilon(1e-12));
  CHECK(kf == doctest::Approx(9.0976353).epsilon(1e-8));
}

TEST_CASE("with Q = 0 every unscented variant coincides") {
  const LinearSystem base = random_linear_system(3, 1);
  const auto sys = LinearSystem::constant(
      base.A(0), Matrix(), base.C(0),
      SpdMatrix(Matrix::Zero(base.state_dim(), base.state_dim())), base.R(0));
  const SystemModel m = sys.to_model();
  const StateEstimate est{Vector::Ones(sys.state_dim()), SpdMatrix::identity(sys.state_dim()), 0};
  const Vector y = Vector::Constant(sys.output_dim(), 0.7);
  const auto u = ukf_step(m, est, Vector(), y);
  const auto a = eukfa_step(m, est, Vector(), y);
  const auto c = eukfc_step(m, est, Vector(), y);
  CHECK(rel_frobenius(a.second.gain, u.second.gain) < 1e-12);
  CHECK(rel_frobenius(c.second.gain, u.second.gain) < 1e-12);
  CHECK(rel_frobenius(a.first.cov.matrix(), u.first.cov.matrix()) < 1e-12);
}

TEST_CASE("variants differ from the UKF in the intended places") {
  const LinearSystem sys = example1_system();
  const SystemModel m = sys.to_model();
  const StateEstimate est{Vector::Ones(2), SpdMatrix::identity(2), 0};
  const auto u = ukf_step(m, est, Vector(), vec({0}));
  const auto c = eukfc_step(m, est, Vector(), vec({0}));
  const auto a = eukfa_step(m, est, Vector(), vec({0}));
  const Matrix cm = sys.C(1);
  const Matrix q = sys.Q(0).matrix();
  // C-variant shares the UKF prior and corrects the innovation terms
  CHECK(rel_frobenius(c.second.prior_cov.matrix(), u.second.prior_cov.matrix()) < 1e-14);
  CHECK(rel_frobenius(c.second.innovation_cov.matrix(),
                      u.second.innovation_cov.matrix() + cm * q * cm.transpose()) < 1e-14);
  CHECK(rel_frobenius(c.second.cross_cov, u.second.cross_cov + q * cm.transpose()) < 1e-14);
  // A-variant moves Q into the sigma spread; the prior ends up the same
  CHECK(rel_frobenius(a.second.prior_cov.matrix(), u.second.prior_cov.matrix()) < 1e-12);
  CHECK(rel_frobenius(a.second.innovation_cov.matrix(), c.second.innovation_cov.matrix()) < 1e-12);
}
