#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kalman/statespace.hpp"

namespace kalman {

/// Checks run against every linear test system.
///
///   missing_terms     P_z^UKF + C Q Cᵀ = P_z^KF and P_ez^UKF + Q Cᵀ = P_ez^KF (rel. 1e-10)
///   trace_inequality  tr P(K^KF) <= tr P(K^UKF) + 1e-10 at every step
///   ukf_differs       max_k<=10 |tr P^UKF − tr P^KF| > 1e-6 (skipped when Q = 0)
///   ukf_equals_kf     UKF trajectory equals KF (only when Q = 0)
///   eukfa_equals_kf   gain and posterior rel. Frobenius error < 1e-9 at every step
///   eukfc_equals_kf   same for the C-variant
///   alpha_invariance  UKF/EUKF-A/EUKF-C covariances identical for α ∈ {1, 1.5, 3}
struct CheckOutcome {
  bool passed = true;
  double worst = 0.0;  // worst deviation seen (meaning depends on the check)
  bool lower_is_worse = false;  // true when `worst` is a margin that must stay large
  std::string note;
};

struct CaseResult {
  std::string name;
  std::map<std::string, CheckOutcome> checks;

  bool passed() const;
};

struct PropositionReport {
  std::vector<CaseResult> cases;

  struct Tally {
    int passed = 0;
    int failed = 0;
    std::optional<double> worst;
  };
  std::map<std::string, Tally> tally() const;
  bool all_passed() const;
  std::string summary() const;
};

/// Random detectable linear system with nonsingular A, spectral radius in
/// [0.3, 1.1] and SPD Q, R.
LinearSystem random_linear_system(std::uint64_t seed, int index);

/// Runs every check on one system from x0 ~ P0 = I.
CaseResult check_linear_system(const LinearSystem& sys, const std::string& name,
                               std::uint64_t seed, int steps = 50);

/// `trials` random systems plus two fixed cases: the first worked example
/// and a Q = 0 system.
PropositionReport verify_propositions(std::uint64_t seed, int trials, int steps = 50);

/// Spectral radius of a square matrix.
double spectral_radius(const Matrix& a);

/// PBH test: every eigenvalue with |λ| >= 1 is observable through C.
bool is_detectable(const Matrix& a, const Matrix& c);

}  // namespace kalman
