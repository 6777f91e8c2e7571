#pragma once

#include <stdexcept>
#include <string>

namespace quasilab {

/// A parameter record or state violates a documented constraint.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exact-enumeration routine was asked for an instance beyond its size guard.
class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative procedure exhausted its budget before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The ordering O^l <= O <= O^{K+1} broke along a coupled trajectory.
class CouplingViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace quasilab
