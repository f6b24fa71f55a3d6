#include "kalman/enkf.hpp"

#include <stdexcept>
#include <string>

#include "kalman/errors.hpp"
#include "kalman/parallel.hpp"
#include "kalman/random.hpp"

namespace kalman {

namespace {

Matrix centered(const Matrix& m) {
  const Vector mean = m.rowwise().mean();
  return m.colwise() - mean;
}

double divisor(Eigen::Index n) { return static_cast<double>(n - 1); }

}  // namespace

Vector Ensemble::mean() const { return members.rowwise().mean(); }

SpdMatrix Ensemble::covariance() const {
  const Matrix c = centered(members);
  return SpdMatrix(c * c.transpose() / divisor(size()));
}

Ensemble enkf_init(const StateEstimate& est, Eigen::Index size, std::uint64_t seed) {
  if (size < 2) throw std::invalid_argument("enkf_init: ensemble size must be >= 2");
  const Eigen::Index n = est.mean.size();
  const Matrix factor = spd_sqrt_factor(est.cov, est.step);
  Ensemble ens;
  ens.seed = seed;
  ens.step = est.step;
  ens.members.resize(n, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    NormalStream stream(seed, StreamKind::kEnsembleInit, static_cast<std::uint64_t>(est.step),
                        static_cast<std::uint64_t>(i));
    ens.members.col(i) = est.mean + factor * stream.normal_vector(n);
  }
  return ens;
}

EnkfResult enkf_step(const SystemModel& model, const Ensemble& ens, const Vector& u,
                     const Vector& y, int threads) {
  const int k = ens.step;
  const int next = k + 1;
  const Eigen::Index n = ens.size();
  if (n < 2) throw std::invalid_argument("enkf_step: ensemble size must be >= 2");
  if (y.size() != model.output_dim) throw DimensionError("enkf_step: measurement size mismatch");

  const Matrix process_factor = psd_factor(model.Q(k).matrix());
  const SpdMatrix r = model.R(next);
  const Matrix obs_factor = psd_factor(r.matrix());

  Matrix forecast(model.state_dim, n);
  Matrix outputs(model.output_dim, n);
  parallel_for(n, threads, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    for (auto i = begin; i < end; ++i) {
      NormalStream stream(ens.seed, StreamKind::kEnsembleProcess, static_cast<std::uint64_t>(k),
                          static_cast<std::uint64_t>(i));
      forecast.col(i) = step_dynamics(model, ens.members.col(i), u, k) +
                        process_factor * stream.normal_vector(model.state_dim);
      outputs.col(i) = measure(model, forecast.col(i), next);
    }
  });
  if (!forecast.allFinite() || !outputs.allFinite()) {
    throw FilterDiverged("ensemble forecast is not finite", next);
  }

  const Vector prior_mean = forecast.rowwise().mean();
  const Vector output_mean = outputs.rowwise().mean();
  const Matrix x_dev = forecast.colwise() - prior_mean;
  const Matrix y_dev = outputs.colwise() - output_mean;
  const SpdMatrix prior_cov(x_dev * x_dev.transpose() / divisor(n));
  const Matrix pez = x_dev * y_dev.transpose() / divisor(n);
  const SpdMatrix pz(y_dev * y_dev.transpose() / divisor(n) + r.matrix());
  const Matrix gain = kf_gain(pz, pez, next);

  Ensemble out;
  out.seed = ens.seed;
  out.step = next;
  out.members.resize(model.state_dim, n);
  parallel_for(n, threads, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    for (auto i = begin; i < end; ++i) {
      NormalStream stream(ens.seed, StreamKind::kEnsembleObservation,
                          static_cast<std::uint64_t>(next), static_cast<std::uint64_t>(i));
      const Vector perturbed = y + obs_factor * stream.normal_vector(model.output_dim);
      out.members.col(i) = forecast.col(i) + gain * (perturbed - outputs.col(i));
    }
  });
  if (!out.members.allFinite()) throw FilterDiverged("ensemble analysis is not finite", next);

  StateEstimate est{out.mean(), out.covariance(), next};

  FilterStepRecord rec;
  rec.prior_mean = prior_mean;
  rec.prior_cov = prior_cov;
  rec.gain = gain;
  rec.innovation_cov = pz;
  rec.cross_cov = pez;
  rec.posterior_mean = est.mean;
  rec.posterior_cov = est.cov;
  rec.step = next;
  rec.predicted_output = output_mean;
  rec.measurement = y;
  return {std::move(out), std::move(est), std::move(rec)};
}

}  // namespace kalman
