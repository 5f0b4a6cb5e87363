#include "mipreg/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mipreg {

RelaxedVector::RelaxedVector(Vec values) : values_(std::move(values)) {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!(v >= -kClampTolerance && v <= 1.0 + kClampTolerance)) {
      throw std::domain_error("relaxed vector entry " + std::to_string(i) + " = " +
                              std::to_string(v) + " lies outside [0,1]");
    }
    values_[i] = std::clamp(v, 0.0, 1.0);
  }
}

RelaxedVector::RelaxedVector(std::initializer_list<double> values)
    : RelaxedVector(Vec(Eigen::Map<const Vec>(values.begin(),
                                              static_cast<Eigen::Index>(values.size())))) {}

BinaryVector::BinaryVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] > 1) {
      throw std::domain_error("binary vector entry " + std::to_string(i) + " is not 0 or 1");
    }
  }
}

BinaryVector::BinaryVector(std::initializer_list<int> bits) {
  bits_.reserve(bits.size());
  for (int b : bits) {
    if (b != 0 && b != 1) throw std::domain_error("binary vector entry is not 0 or 1");
    bits_.push_back(static_cast<std::uint8_t>(b));
  }
}

RelaxedVector BinaryVector::relaxed() const {
  Vec v(static_cast<Eigen::Index>(bits_.size()));
  for (std::size_t i = 0; i < bits_.size(); ++i) v[static_cast<Eigen::Index>(i)] = bits_[i];
  return RelaxedVector(std::move(v));
}

BinaryVector hard_threshold(const RelaxedVector& x) {
  std::vector<std::uint8_t> bits(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    // Same as floor(x + 1/2) on [0,1], without the rounding of x + 0.5 that
    // sends 0.49999999999999994 to 1.
    bits[i] = x[i] >= 0.5 ? 1 : 0;
  }
  return BinaryVector(std::move(bits));
}

double distance(const RelaxedVector& x) { return kernel::distance(x.values()); }

PenaltyValue penalty(const RelaxedVector& x, const RelaxedVector& a, double lambda) {
  if (x.size() != a.size()) {
    throw std::invalid_argument("penalty: dimension mismatch (" + std::to_string(x.size()) +
                                " vs " + std::to_string(a.size()) + ")");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("penalty: lambda must be positive");
  return {lambda, lambda * kernel::unit_penalty(x.values(), a.values())};
}

bool in_S(const RelaxedVector& x, const RelaxedVector& a, double tol) {
  if (x.size() != a.size()) throw std::invalid_argument("in_S: dimension mismatch");
  return kernel::unit_penalty(x.values(), a.values()) <= tol;
}

RelaxedVector update_a(const RelaxedVector& x) { return hard_threshold(x).relaxed(); }

namespace kernel {

double unit_penalty(const Vec& x, const Vec& a) {
  // Summed per coordinate so that replacing a by threshold(x) can only
  // shrink every term, which keeps the a-step monotone in floating point.
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double term = 1.0 - x[i] * a[i] - (1.0 - x[i]) * (1.0 - a[i]);
    total += std::max(term, 0.0);
  }
  return total;
}

Vec unit_penalty_gradient(const Vec& a) { return Vec::Ones(a.size()) - 2.0 * a; }

double distance(const Vec& x) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) total += 1.0 - std::max(x[i], 1.0 - x[i]);
  return std::max(total, 0.0);
}

Vec threshold(const Vec& x) {
  Vec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = x[i] >= 0.5 ? 1.0 : 0.0;
  return out;
}

}  // namespace kernel

}  // namespace mipreg
