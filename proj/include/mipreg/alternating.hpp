#pragma once

// Block-cyclic minimization of f(x, y) + lambda * penalty(x, a) with a
// geometrically increasing lambda.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mipreg/penalty.hpp"
#include "mipreg/subsolver.hpp"

namespace mipreg {

/// A slice [begin, begin + size) of the continuous variables y.
struct ContinuousBlock {
  Index begin = 0;
  Index size = 0;
  std::string name;
  /// Optional closed-form minimizer of f over this block with everything
  /// else fixed. Receives the full z = [x; y] and returns the block values.
  std::function<Vec(const Vec&)> exact;
};

/// min f(x, y) over the region with x in {0,1}^n. Variables are stacked as
/// z = [x; y] with x first.
struct MixedProblem {
  Index n = 0;
  Index m = 0;
  Objective objective;
  FeasibleRegion region;
  /// Partition of y used by solve_multiblock. Empty means one block.
  std::vector<ContinuousBlock> blocks;
  /// Optional closed-form minimizer over all of y at once (used by solve).
  std::function<Vec(const Vec&)> exact_y;
  /// Lipschitz constant of f in x over [0,1]^n, if known.
  std::optional<double> lipschitz;

  void validate() const;
};

class PenaltySchedule {
 public:
  PenaltySchedule(double lambda0 = 1.0, double rho = 2.0);
  /// Fixed lambda (rho = 1); used for sweeps over lambda.
  static PenaltySchedule constant(double lambda);

  double lambda0() const { return lambda0_; }
  double rho() const { return rho_; }
  int t() const { return t_; }
  bool is_constant() const { return rho_ == 1.0; }
  /// lambda0 * rho^t, recomputed from scratch on each call.
  double lambda() const;
  void advance() { ++t_; }

 private:
  double lambda0_, rho_;
  int t_ = 0;
};

struct IterationRecord {
  int t = 0;
  double lambda = 0.0;
  // Penalized objective at the start of the iteration and after each step.
  double value_start = 0.0;
  double value_after_y = 0.0;
  double value_after_x = 0.0;
  double value_after_a = 0.0;
  double f = 0.0;
  double distance = 0.0;
  double step_change = 0.0;
  double x_kkt = 0.0;
};

struct SolveTrace {
  std::vector<IterationRecord> records;
  Vec x, y, a;
  bool binary = false;
  bool converged = false;
  int iterations = 0;
  /// First t whose post-x-step iterate has d(x) <= epsilon.
  std::optional<int> first_binary;
  double final_lambda = 0.0;
  double final_f = 0.0;
  double final_value = 0.0;
  int convexity_violations = 0;
};

struct SolveOptions {
  double epsilon = 1e-3;
  double stop_tol = 1e-6;
  int max_outer = 200;
  double lambda_cap_factor = 1e12;
  SubsolverOptions subsolver;
  /// Starting z = [x; y]; default is the projection of 0 onto the region.
  std::optional<Vec> start;
  /// Starting a; default 0.
  std::optional<Vec> start_a;
  /// Sample each block for convexity violations before solving.
  bool check_convexity = false;
};

/// Failure inside iteration `iteration`; the original exception is nested.
class IterationError : public SolverError {
 public:
  IterationError(const std::string& what, int iteration) : SolverError(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// f(z) + lambda * penalty(x, a).
double penalized_value(const MixedProblem& p, const Vec& z, const Vec& a, double lambda);

SolveTrace solve(const MixedProblem& problem, PenaltySchedule schedule,
                 const SolveOptions& opt = {});

/// As solve, but the y-step visits the declared blocks one at a time.
SolveTrace solve_multiblock(const MixedProblem& problem, PenaltySchedule schedule,
                            const SolveOptions& opt = {});

/// ceil((ln(L sqrt(n)) - ln(epsilon lambda0)) / ln rho), floored at 0.
int iteration_bound(double L, Index n, double epsilon, double lambda0, double rho);

/// Any lambda strictly above the returned value makes the x-step binary.
double lambda_threshold(double L);

struct ConvexityReport {
  int samples = 0;
  int violations = 0;
  double worst = 0.0;
};

/// Midpoint-convexity test of f along random segments that move one block
/// (x, or one continuous block) between feasible points.
ConvexityReport check_block_convexity(const MixedProblem& problem, int samples,
                                      std::uint64_t seed, double tol = 1e-6);

}  // namespace mipreg
