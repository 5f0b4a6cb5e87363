#pragma once

// Difference-of-convex extension: f = f_a - f_b with the subtracted part
// linearized at an anchor each outer iteration, and DC inequalities
// g_a - g_b <= 0 replaced by their convex majorants g_a - lin(g_b) <= 0.

#include <optional>
#include <string>
#include <vector>

#include "mipreg/alternating.hpp"

namespace mipreg {

struct DCFunction {
  Objective fa;
  /// May be left empty, meaning f_b = 0.
  Objective fb;

  bool has_fb() const { return static_cast<bool>(fb.value); }
  double value(const Vec& z) const { return fa.value(z) - (has_fb() ? fb.value(z) : 0.0); }
  Vec gradient(const Vec& z) const {
    return has_fb() ? Vec(fa.gradient(z) - fb.gradient(z)) : fa.gradient(z);
  }
};

/// g_a(z) - g_b(z) <= 0 with both parts convex.
struct DCConstraint {
  Objective ga;
  Objective gb;
  std::string name;

  double value(const Vec& z) const { return ga.value(z) - gb.value(z); }
};

/// First-order data of f_b at the point (x^(l), y^(l)).
struct LinearizationAnchor {
  Vec point;
  double value = 0.0;
  Vec gradient;

  static LinearizationAnchor at(const Objective& fb, const Vec& point);
};

/// c + <g, z - z0>.
struct AffineFunction {
  double c = 0.0;
  Vec g;
  Vec z0;

  double operator()(const Vec& z) const { return c + g.dot(z - z0); }
};

AffineFunction linearize(const LinearizationAnchor& anchor);
AffineFunction linearize(const Objective& fb, const Vec& anchor);

/// Largest violation of the original constraints: the convex region plus
/// every DC inequality.
double original_violation(const FeasibleRegion& region, const std::vector<DCConstraint>& dc,
                          const Vec& z);

/// The region with each DC inequality replaced by g_a - lin(g_b) <= 0 at
/// the anchor. Throws InfeasibleStartError if the anchor is not feasible in
/// the original region (within tol).
FeasibleRegion convexify_region(const FeasibleRegion& region, const std::vector<DCConstraint>& dc,
                                const Vec& anchor, double tol = 1e-8);

/// L + ||grad_x f_b(anchor)||_2.
double linearized_lipschitz(double L, const Vec& grad_fb_x);

struct DCProblem {
  Index n = 0;
  Index m = 0;
  DCFunction objective;
  FeasibleRegion region;
  std::vector<DCConstraint> dc_constraints;
  std::vector<ContinuousBlock> blocks;
  /// Lipschitz constant of f_a in x, if known.
  std::optional<double> lipschitz_a;
};

struct DCOptions {
  SolveOptions inner;
  int max_outer_dc = 50;
  double outer_tol = 1e-6;
  int patience = 2;
  double feasibility_tol = 1e-8;
};

struct DCOuterRecord {
  int l = 0;
  double value = 0.0;  // f + penalty at the accepted (or rejected) candidate
  double f = 0.0;
  bool accepted = false;
  int inner_iterations = 0;
  std::optional<double> inner_lipschitz;
};

struct DCResult {
  std::vector<DCOuterRecord> outer;
  SolveTrace inner;  // last accepted inner solve
  Vec x, y, a;
  double initial_value = 0.0;
  double final_value = 0.0;
  double final_f = 0.0;
  bool converged = false;
};

/// Outer loop: linearize at the anchor, solve the convexified problem with a
/// fresh copy of `schedule`, move the anchor. A candidate that raises
/// f + penalty is discarded and the loop stops, so accepted values never
/// increase.
DCResult dc_solve(const DCProblem& problem, const PenaltySchedule& schedule, const Vec& start,
                  const DCOptions& opt = {});

}  // namespace mipreg
