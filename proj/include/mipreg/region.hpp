#pragma once

// Feasible sets for the block subproblems: a box, affine equalities, linear
// half-spaces and smooth convex inequalities g(x) <= 0.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mipreg/errors.hpp"

namespace mipreg {

using Index = Eigen::Index;

/// Sparse linear form sum_j coef[j] * x[index[j]] compared against rhs.
struct SparseRow {
  std::vector<Index> index;
  std::vector<double> coef;
  double rhs = 0.0;
  std::string name;

  double dot(const Vec& x) const;
  double norm2() const;
};

/// g(x) <= 0 with g convex and differentiable.
struct ConvexInequality {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::string name;
};

struct ProjectionOptions {
  double tol = 1e-10;
  int max_cycles = 20000;
  int max_linearizations = 100;
};

class FeasibleRegion {
 public:
  FeasibleRegion() = default;
  FeasibleRegion(Vec lower, Vec upper);

  Index dim() const { return lower_.size(); }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

  void add_equality(SparseRow row);
  void add_linear_inequality(SparseRow row);
  void add_inequality(ConvexInequality g);

  const std::vector<SparseRow>& equalities() const { return equalities_; }
  const std::vector<SparseRow>& linear_inequalities() const { return linear_inequalities_; }
  const std::vector<ConvexInequality>& inequalities() const { return inequalities_; }

  /// Largest violation over box, equalities (absolute residual) and
  /// inequalities (positive part).
  double max_violation(const Vec& x) const;
  bool contains(const Vec& x, double tol) const { return max_violation(x) <= tol; }

  /// Region over the coordinates listed in `free`, with every other
  /// coordinate frozen at its value in `point`. Output coordinate j
  /// corresponds to point[free[j]].
  FeasibleRegion slice(const std::vector<Index>& free, const Vec& point) const;

  /// Euclidean diameter of the box.
  double diameter() const;

  /// Euclidean projection by Dykstra's cyclic scheme. The box together with
  /// pairwise-disjoint equality rows is projected exactly; remaining sets
  /// are visited in turn with Dykstra corrections. Throws ProjectionError if
  /// the result is still infeasible after max_cycles.
  Vec project(const Vec& p, const ProjectionOptions& opt = {}) const;

 private:
  void check_row(const SparseRow& row) const;
  void partition_equalities() const;
  Vec project_box_block(const Vec& p) const;

  Vec lower_, upper_;
  std::vector<SparseRow> equalities_;
  std::vector<SparseRow> linear_inequalities_;
  std::vector<ConvexInequality> inequalities_;

  // Equality rows split into those merged with the box and the rest.
  mutable bool partitioned_ = false;
  mutable std::vector<std::size_t> block_rows_, hyperplane_rows_;
  mutable std::vector<std::uint8_t> in_block_;
};

/// Projection of p onto {lower <= x <= upper, a.x = b} restricted to the
/// coordinates in `row`; other coordinates of `x` are left untouched.
/// Solves the one-dimensional dual by bisection over sorted breakpoints.
void project_box_hyperplane(const SparseRow& row, const Vec& lower, const Vec& upper,
                            const Vec& p, Vec& x);

}  // namespace mipreg
