#pragma once

#include <stdexcept>
#include <string>

namespace sweep {

// Base class for all failures raised by the solver stack. The CLI maps
// SolverError to exit code 2 and check-style failures to exit code 1.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative routine exhausted its budget without meeting its tolerance.
class NoConvergence : public SolverError {
 public:
  explicit NoConvergence(const std::string& msg) : SolverError(msg) {}
};

// Point handed to the projection lies farther from the set than the
// certified uniqueness tube allows.
class OutsideProxTube : public SolverError {
 public:
  explicit OutsideProxTube(const std::string& msg) : SolverError(msg) {}
};

// Operation requires a point on the level surface and got one that is not.
class NotOnBoundary : public SolverError {
 public:
  explicit NotOnBoundary(const std::string& msg) : SolverError(msg) {}
};

// A time step moves the data farther than the step-size gate permits.
// The message carries the suggested grid refinement factor.
class SweepGateViolated : public SolverError {
 public:
  SweepGateViolated(const std::string& msg, int suggested_refinement)
      : SolverError(msg), suggested_refinement_(suggested_refinement) {}
  [[nodiscard]] int suggested_refinement() const { return suggested_refinement_; }

 private:
  int suggested_refinement_;
};

// Fixed-point iteration constants fail the contraction requirement.
class NotAContraction : public SolverError {
 public:
  explicit NotAContraction(const std::string& msg) : SolverError(msg) {}
};

class MaxIterExceeded : public NoConvergence {
 public:
  explicit MaxIterExceeded(const std::string& msg) : NoConvergence(msg) {}
};

// Invalid run configuration (bad keys, missing fields, inconsistent data).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sweep
