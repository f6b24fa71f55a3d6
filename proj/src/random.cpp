#include "kalman/random.hpp"

#include <cmath>
#include <numbers>

namespace kalman {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

NormalStream::NormalStream(std::uint64_t seed, StreamKind kind, std::uint64_t step,
                           std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(kind));
  h = splitmix64(h ^ step);
  key_ = splitmix64(h ^ index);
}

double NormalStream::uniform() {
  const std::uint64_t bits = splitmix64(key_ + 0x632be59bd9b4e019ULL * ++counter_);
  // 53 random mantissa bits, shifted off zero
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double NormalStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Vector NormalStream::normal_vector(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

}  // namespace kalman
