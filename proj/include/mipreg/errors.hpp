#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace mipreg {

using Vec = Eigen::VectorXd;

/// Base class for numerical failures inside the solvers.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a subproblem is started from a point outside its region.
class InfeasibleStartError : public SolverError {
 public:
  InfeasibleStartError(const std::string& what, Vec point, double violation)
      : SolverError(what), point_(std::move(point)), violation_(violation) {}

  const Vec& point() const { return point_; }
  double violation() const { return violation_; }

 private:
  Vec point_;
  double violation_;
};

/// Raised when an objective or constraint evaluates to NaN or infinity.
class NonFiniteError : public SolverError {
 public:
  NonFiniteError(const std::string& what, Vec point)
      : SolverError(what), point_(std::move(point)) {}

  const Vec& point() const { return point_; }

 private:
  Vec point_;
};

/// Alternating projections did not settle; the region is probably empty.
class ProjectionError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Input data describes a problem with no feasible point.
class InfeasibleInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed instance or configuration file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mipreg
