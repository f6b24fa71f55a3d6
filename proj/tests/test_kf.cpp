#include <doctest.h>

#include <random>

#include "kalman/errors.hpp"
#include "kalman/harness.hpp"
#include "kalman/kf.hpp"
#include "kalman/propositions.hpp"
#include "test_support.hpp"

using namespace kalman;
using kalman::testing::joseph_cov;
using kalman::testing::random_matrix;
using kalman::testing::random_spd;
using kalman::testing::vec;

namespace {

StateEstimate unit_prior(Eigen::Index n) { return {Vector::Ones(n), SpdMatrix::identity(n), 0}; }

}  // namespace

TEST_CASE("kf_predict") {
  SUBCASE("identity dynamics without noise keeps the estimate") {
    const auto sys = LinearSystem::constant(Matrix::Identity(2, 2), Matrix(), Matrix::Ones(1, 2),
                                            SpdMatrix(Matrix::Zero(2, 2)), SpdMatrix::identity(1));
    const StateEstimate est{vec({3, -1}), SpdMatrix(Matrix(Eigen::Vector2d(2, 5).asDiagonal())), 0};
    const Prior p = kf_predict(sys, est, Vector());
    CHECK(p.mean == est.mean);
    CHECK(p.cov.matrix() == est.cov.matrix());
  }
  SUBCASE("first example prior covariance is A Aᵀ + I") {
    const Prior p = kf_predict(example1_system(), unit_prior(2), Vector());
    const Matrix expected = (Matrix(2, 2) << 11.17, -1.47, -1.47, 1.49).finished();
    CHECK((p.cov.matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("annihilating dynamics leaves Q") {
    const auto sys = LinearSystem::constant(Matrix::Zero(2, 2), Matrix(), Matrix::Ones(1, 2),
                                            SpdMatrix::identity(2), SpdMatrix::identity(1));
    CHECK(kf_predict(sys, unit_prior(2), Vector()).cov.matrix() == Matrix::Identity(2, 2));
  }
}

TEST_CASE("kf_innovation") {
  const auto prior = SpdMatrix((Matrix(2, 2) << 11.17, -1.47, -1.47, 1.49).finished());
  SUBCASE("first example") {
    const Innovation inn = kf_innovation(example1_system(), prior, 1);
    CHECK(inn.pz.matrix()(0, 0) == doctest::Approx(2.9357).epsilon(1e-12));
    CHECK(inn.pez(0, 0) == doctest::Approx(-3.145).epsilon(1e-12));
    CHECK(inn.pez(1, 0) == doctest::Approx(-0.753).epsilon(1e-12));
  }
  SUBCASE("C = 0 gives R and no cross covariance") {
    const auto sys = LinearSystem::constant(Matrix::Identity(2, 2), Matrix(), Matrix::Zero(1, 2),
                                            SpdMatrix::identity(2), SpdMatrix::scaled_identity(1, 0.3));
    const Innovation inn = kf_innovation(sys, prior, 1);
    CHECK(inn.pz.matrix()(0, 0) == 0.3);
    CHECK(inn.pez.isZero(0.0));
  }
  SUBCASE("R = 0, C = I gives the prior") {
    const auto sys = LinearSystem::constant(Matrix::Identity(2, 2), Matrix(), Matrix::Identity(2, 2),
                                            SpdMatrix::identity(2), SpdMatrix(Matrix::Zero(2, 2)));
    CHECK(kf_innovation(sys, prior, 1).pz.matrix() == prior.matrix());
  }
}

TEST_CASE("kf_gain") {
  const Matrix pez = (Matrix(2, 1) << -3.145, -0.753).finished();
  CHECK(kf_gain(SpdMatrix::identity(1), pez) == pez);
  const Matrix k = kf_gain(SpdMatrix((Matrix(1, 1) << 2.9357).finished()), pez);
  CHECK(k(0, 0) == doctest::Approx(-1.0713).epsilon(1e-4));
  CHECK(k(1, 0) == doctest::Approx(-0.2565).epsilon(1e-3));
  CHECK(kf_gain(SpdMatrix::identity(1), Matrix::Zero(2, 1)).isZero(0.0));
  CHECK_THROWS(kf_gain(SpdMatrix(Matrix::Zero(1, 1)), pez));
}

TEST_CASE("kf_update") {
  const Vector prior_mean = vec({1, 2});
  const SpdMatrix prior_cov((Matrix(2, 2) << 2, 0.5, 0.5, 1).finished());
  const Matrix pez = (Matrix(2, 1) << 0.4, 0.2).finished();

  SUBCASE("zero gain keeps the prior") {
    const Posterior p = kf_update(prior_mean, prior_cov, Matrix::Zero(2, 1), pez, vec({3}), vec({1}));
    CHECK(p.mean == prior_mean);
    CHECK(p.cov.matrix() == prior_cov.matrix());
  }
  SUBCASE("matching prediction keeps the mean") {
    const Posterior p = kf_update(prior_mean, prior_cov, pez, pez, vec({1}), vec({1}));
    CHECK(p.mean == prior_mean);
  }
  SUBCASE("first example posterior trace") {
    const auto [est, rec] = kf_step(example1_system(), unit_prior(2), Vector(), vec({0}));
    // 12.66 − (3.145² + 0.753²)/2.9357
    const double hand = 12.66 - (3.145 * 3.145 + 0.753 * 0.753) / 2.9357;
    CHECK(est.cov.trace() == doctest::Approx(hand).epsilon(1e-12));
    CHECK(est.cov.trace() == doctest::Approx(9.0976).epsilon(1e-5));
  }
  SUBCASE("indefinite posterior is rejected") {
    CHECK_THROWS_AS(kf_update(prior_mean, prior_cov, Matrix::Constant(2, 1, 10.0),
                              Matrix::Constant(2, 1, 10.0), vec({0}), vec({0}), 4),
                    NotPositiveDefinite);
  }
}

TEST_CASE("evaluate_gain_cov") {
  const auto [est, rec] = kf_step(example1_system(), unit_prior(2), Vector(), vec({0.5}));
  SUBCASE("Kalman gain reproduces the posterior") {
    const SpdMatrix p = evaluate_gain_cov(rec.prior_cov, rec.innovation_cov, rec.cross_cov, rec.gain);
    CHECK(rel_frobenius(p.matrix(), est.cov.matrix()) < 1e-12);
  }
  SUBCASE("zero gain gives the prior") {
    const SpdMatrix p =
        evaluate_gain_cov(rec.prior_cov, rec.innovation_cov, rec.cross_cov, Matrix::Zero(2, 1));
    CHECK(p.matrix() == rec.prior_cov.matrix());
  }
}

TEST_CASE("Kalman gain minimizes the trace of P(K)") {
  std::mt19937_64 rng(2024);
  int systems = 0;
  for (int trial = 0; systems < 100; ++trial) {
    const LinearSystem sys = random_linear_system(77, trial);
    ++systems;
    const Eigen::Index n = sys.state_dim();
    const StateEstimate est{Vector::Zero(n), SpdMatrix(random_spd(rng, n)), 0};
    const auto [post, rec] = kf_step(sys, est, Vector(), Vector::Zero(sys.output_dim()));
    const double best =
        evaluate_gain_cov(rec.prior_cov, rec.innovation_cov, rec.cross_cov, rec.gain).trace();
    for (int g = 0; g < 20; ++g) {
      const Matrix other = rec.gain + random_matrix(rng, n, sys.output_dim()) * (0.01 + g * 0.1);
      const double tr =
          evaluate_gain_cov(rec.prior_cov, rec.innovation_cov, rec.cross_cov, other).trace();
      CHECK(tr >= best - 1e-10);
    }
  }
}

TEST_CASE("posterior covariance matches the Joseph form and ignores y") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const LinearSystem sys = random_linear_system(5, trial);
    const Eigen::Index n = sys.state_dim();
    const StateEstimate est{Vector::Zero(n), SpdMatrix(random_spd(rng, n)), 0};
    const auto [a, rec_a] = kf_step(sys, est, Vector(), Vector::Zero(sys.output_dim()));
    const auto [b, rec_b] =
        kf_step(sys, est, Vector(), random_matrix(rng, sys.output_dim(), 1) * 10.0);
    const Matrix joseph =
        joseph_cov(rec_a.prior_cov.matrix(), rec_a.gain, sys.C(1), sys.R(1).matrix());
    CHECK(rel_frobenius(a.cov.matrix(), joseph) < 1e-9);
    CHECK(a.cov.matrix() == b.cov.matrix());
  }
}
