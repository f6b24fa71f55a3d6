#pragma once

#include <stdexcept>
#include <string>

namespace kalman {

/// Base class for every error raised by the filtering library.
class FilterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public FilterError {
 public:
  using FilterError::FilterError;
};

/// Step-tagged error. `step()` is -1 when the failing call had no step context.
class StepError : public FilterError {
 public:
  StepError(const std::string& what, int step)
      : FilterError(step >= 0 ? what + " (step " + std::to_string(step) + ")" : what),
        step_(step) {}

  int step() const noexcept { return step_; }

 private:
  int step_;
};

class NotPositiveDefinite : public StepError {
 public:
  explicit NotPositiveDefinite(const std::string& what, int step = -1) : StepError(what, step) {}
};

class SingularDynamicsJacobian : public StepError {
 public:
  explicit SingularDynamicsJacobian(const std::string& what, int step = -1) : StepError(what, step) {}
};

class FilterDiverged : public StepError {
 public:
  explicit FilterDiverged(const std::string& what, int step = -1) : StepError(what, step) {}
};

class TruthDiverged : public StepError {
 public:
  explicit TruthDiverged(const std::string& what, int step = -1) : StepError(what, step) {}
};

class JacobianUnavailable : public FilterError {
 public:
  using FilterError::FilterError;
};

}  // namespace kalman
