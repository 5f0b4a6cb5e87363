#pragma once

// Binary-relaxation machinery: hard thresholding, the l1 distance to the
// nearest binary point, and the bilinear penalty that vanishes exactly on
// binary pairs x == a.

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "mipreg/errors.hpp"

namespace mipreg {

/// A point of the unit box [0,1]^n.
///
/// Values that leave the box by at most kClampTolerance are clamped back in
/// (subsolver round-off); anything further out is rejected.
class RelaxedVector {
 public:
  static constexpr double kClampTolerance = 1e-12;

  RelaxedVector() = default;
  explicit RelaxedVector(Vec values);
  RelaxedVector(std::initializer_list<double> values);

  const Vec& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

 private:
  Vec values_;
};

/// A point of {0,1}^n.
class BinaryVector {
 public:
  BinaryVector() = default;
  explicit BinaryVector(std::vector<std::uint8_t> bits);
  BinaryVector(std::initializer_list<int> bits);

  std::size_t size() const { return bits_.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  RelaxedVector relaxed() const;

  friend bool operator==(const BinaryVector&, const BinaryVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct PenaltyValue {
  double lambda = 0.0;
  double value = 0.0;
};

/// Componentwise floor(x_i + 1/2); ties at 0.5 round up.
BinaryVector hard_threshold(const RelaxedVector& x);

/// ||x - hard_threshold(x)||_1, evaluated as n - sum max(x_i, 1 - x_i).
double distance(const RelaxedVector& x);

/// lambda * (n - <x,a> - <1-x,1-a>). Throws std::invalid_argument on a
/// dimension mismatch or non-positive lambda.
PenaltyValue penalty(const RelaxedVector& x, const RelaxedVector& a, double lambda);

/// True when the unit penalty is at most tol, i.e. (x, a) lies in the set
/// where x == a and both are binary.
bool in_S(const RelaxedVector& x, const RelaxedVector& a, double tol);

/// Closed-form minimizer of the penalty over a in [0,1]^n for fixed x.
RelaxedVector update_a(const RelaxedVector& x);

// Unchecked variants used on solver hot paths. Inputs are assumed to be in
// [0,1] up to projection tolerance.
namespace kernel {

double unit_penalty(const Vec& x, const Vec& a);
/// Gradient of unit_penalty with respect to x: 1 - 2a.
Vec unit_penalty_gradient(const Vec& a);
double distance(const Vec& x);
Vec threshold(const Vec& x);

}  // namespace kernel

}  // namespace mipreg
