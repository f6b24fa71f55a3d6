#pragma once

#include <cstdint>

#include "kalman/numerics.hpp"

namespace kalman {

/// Independent random streams. Each (seed, kind, step, index) tuple owns its
/// own sequence, so draws do not depend on evaluation order or thread count.
enum class StreamKind : std::uint64_t {
  kEnsembleInit = 1,
  kEnsembleProcess = 2,
  kEnsembleObservation = 3,
  kTruthInit = 4,
  kTruthProcess = 5,
  kTruthMeasurement = 6,
  kTestSystems = 7,
};

/// Counter-based standard-normal generator (SplitMix64 hashing + Box–Muller).
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, StreamKind kind, std::uint64_t step, std::uint64_t index);

  double uniform();  // in (0, 1)
  double normal();
  Vector normal_vector(Eigen::Index n);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace kalman
