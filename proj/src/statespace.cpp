#include "kalman/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kalman/errors.hpp"

namespace kalman {

namespace {

void check_size(const Vector& v, Eigen::Index expected, const char* what) {
  if (v.size() != expected) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                         ", got " + std::to_string(v.size()));
  }
}

constexpr double sigma = 10.0;
constexpr double rho = 28.0;
constexpr double beta = 8.0 / 3.0;

Vector resolve_input(const SystemModel& model, const Vector& u) {
  if (u.size() == 0 && model.input_dim > 0) return model.zero_input();
  check_size(u, model.input_dim, "input");
  return u;
}

}  // namespace

SystemModel::CovarianceFn constant_covariance(SpdMatrix m) {
  return [m = std::move(m)](int) { return m; };
}

LinearSystem LinearSystem::constant(const Matrix& a, const Matrix& b, const Matrix& c,
                                    const SpdMatrix& q, const SpdMatrix& r, std::string name) {
  if (a.rows() != a.cols()) throw DimensionError("A must be square");
  if (c.cols() != a.rows()) throw DimensionError("C must have l_x columns");
  if (b.size() != 0 && b.rows() != a.rows()) throw DimensionError("B must have l_x rows");
  if (q.dim() != a.rows()) throw DimensionError("Q must be l_x × l_x");
  if (r.dim() != c.rows()) throw DimensionError("R must be l_y × l_y");
  LinearSystem sys;
  sys.name = std::move(name);
  sys.A = [a](int) { return a; };
  const Matrix bb = b.size() == 0 ? Matrix(a.rows(), 0) : b;
  sys.B = [bb](int) { return bb; };
  sys.C = [c](int) { return c; };
  sys.Q = constant_covariance(q);
  sys.R = constant_covariance(r);
  return sys;
}

Eigen::Index LinearSystem::state_dim() const { return A(0).rows(); }
Eigen::Index LinearSystem::input_dim() const { return B ? B(0).cols() : 0; }
Eigen::Index LinearSystem::output_dim() const { return C(0).rows(); }

Matrix LinearSystem::input_matrix(int k) const {
  return B ? B(k) : Matrix(state_dim(), 0);
}

SystemModel LinearSystem::to_model() const {
  SystemModel m;
  m.name = name;
  m.state_dim = state_dim();
  m.input_dim = input_dim();
  m.output_dim = output_dim();
  auto a = A;
  auto b = B;
  auto c = C;
  m.dynamics = [a, b](const Vector& x, const Vector& u, int k) -> Vector {
    Vector next = a(k) * x;
    if (u.size() > 0 && b) next += b(k) * u;
    return next;
  };
  m.measurement = [c](const Vector& x, int k) -> Vector { return c(k) * x; };
  m.dynamics_jacobian = [a](const Vector&, const Vector&, int k) { return a(k); };
  m.measurement_jacobian = [c](const Vector&, int k) { return c(k); };
  m.process_noise = Q;
  m.measurement_noise = R;
  return m;
}

Vector step_dynamics(const SystemModel& model, const Vector& x, const Vector& u, int k) {
  check_size(x, model.state_dim, "state");
  Vector next = model.dynamics(x, resolve_input(model, u), k);
  check_size(next, model.state_dim, "dynamics output");
  return next;
}

Vector measure(const SystemModel& model, const Vector& x, int k) {
  check_size(x, model.state_dim, "state");
  Vector y = model.measurement(x, k);
  check_size(y, model.output_dim, "measurement output");
  return y;
}

Matrix jacobian_dynamics(const SystemModel& model, const Vector& x, const Vector& u, int k) {
  check_size(x, model.state_dim, "state");
  const Vector uu = resolve_input(model, u);
  if (model.dynamics_jacobian) return model.dynamics_jacobian(x, uu, k);
  if (!model.allow_fd_jacobian) {
    throw JacobianUnavailable("model '" + model.name + "' has no dynamics Jacobian");
  }
  return jacobian_fd([&](const Vector& z) { return model.dynamics(z, uu, k); }, x);
}

Matrix jacobian_measurement(const SystemModel& model, const Vector& x, int k) {
  check_size(x, model.state_dim, "state");
  if (model.measurement_jacobian) return model.measurement_jacobian(x, k);
  if (!model.allow_fd_jacobian) {
    throw JacobianUnavailable("model '" + model.name + "' has no measurement Jacobian");
  }
  return jacobian_fd([&](const Vector& z) { return model.measurement(z, k); }, x);
}

Matrix jacobian_fd(const std::function<Vector(const Vector&)>& fn, const Vector& x, double h) {
  if (h <= 0.0) h = 1e-6 * std::max(1.0, x.size() > 0 ? x.cwiseAbs().maxCoeff() : 0.0);
  const Vector f0 = fn(x);
  Matrix jac(f0.size(), x.size());
  Vector probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const Vector plus = fn(probe);
    probe[j] = x[j] - h;
    const Vector minus = fn(probe);
    probe[j] = x[j];
    if (!plus.allFinite() || !minus.allFinite()) {
      throw FilterDiverged("non-finite function value in finite-difference Jacobian");
    }
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

SystemModel make_vdp(double ts, double mu, double q, double r) {
  if (!(ts > 0.0)) throw std::invalid_argument("make_vdp: step size must be positive");
  SystemModel m;
  m.name = "vdp";
  m.state_dim = 2;
  m.output_dim = 1;
  m.dynamics = [ts, mu](const Vector& x, const Vector&, int) -> Vector {
    Vector next(2);
    next << x[0] + ts * x[1], x[1] + ts * (mu * (1.0 - x[0] * x[0]) * x[1] - x[0]);
    return next;
  };
  m.dynamics_jacobian = [ts, mu](const Vector& x, const Vector&, int) -> Matrix {
    Matrix j(2, 2);
    j << 1.0, ts,
        -ts * (2.0 * mu * x[0] * x[1] + 1.0), 1.0 + ts * mu * (1.0 - x[0] * x[0]);
    return j;
  };
  const Matrix c = (Matrix(1, 2) << 1.0, 0.0).finished();
  m.measurement = [c](const Vector& x, int) -> Vector { return c * x; };
  m.measurement_jacobian = [c](const Vector&, int) { return c; };
  m.process_noise = constant_covariance(SpdMatrix::scaled_identity(2, q));
  m.measurement_noise = constant_covariance(SpdMatrix::scaled_identity(1, r));
  return m;
}

SystemModel make_lorenz(double ts, double q, double r) {
  if (!(ts > 0.0)) throw std::invalid_argument("make_lorenz: step size must be positive");
  SystemModel m;
  m.name = "lorenz";
  m.state_dim = 3;
  m.output_dim = 1;
  m.dynamics = [ts](const Vector& x, const Vector&, int) -> Vector {
    Vector next(3);
    next << x[0] + ts * sigma * (x[1] - x[0]),
        x[1] + ts * (x[0] * (rho - x[2]) - x[1]),
        x[2] + ts * (x[0] * x[1] - beta * x[2]);
    return next;
  };
  m.dynamics_jacobian = [ts](const Vector& x, const Vector&, int) -> Matrix {
    Matrix j(3, 3);
    j << -sigma, sigma, 0.0,
        rho - x[2], -1.0, -x[0],
        x[1], x[0], -beta;
    return Matrix::Identity(3, 3) + ts * j;
  };
  const Matrix c = (Matrix(1, 3) << 0.0, 1.0, 0.0).finished();
  m.measurement = [c](const Vector& x, int) -> Vector { return c * x; };
  m.measurement_jacobian = [c](const Vector&, int) { return c; };
  m.process_noise = constant_covariance(SpdMatrix::scaled_identity(3, q));
  m.measurement_noise = constant_covariance(SpdMatrix::scaled_identity(1, r));
  return m;
}

}  // namespace kalman
