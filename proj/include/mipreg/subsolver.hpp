#pragma once

// Projected-gradient minimization of a smooth convex function over a
// FeasibleRegion.

#include <functional>

#include "mipreg/region.hpp"

namespace mipreg {

struct Objective {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

struct SubsolverOptions {
  double tol = 1e-8;
  int max_iter = 10000;
  double start_tolerance = 1e-8;
  double armijo = 1e-4;
  double backtrack = 0.5;
  ProjectionOptions projection;
};

struct SubproblemResult {
  Vec minimizer;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// ||x - P(x - t grad f(x))||_inf / t, t = min(1, diameter / ||grad f(x)||).
double kkt_residual(const Vec& x, const Vec& gradient, const FeasibleRegion& region,
                    const ProjectionOptions& opt = {});

/// Projected gradient with Barzilai-Borwein trial steps and Armijo
/// backtracking. Only decreasing steps are accepted, so the returned value
/// never exceeds the value at `start`.
SubproblemResult minimize(const Objective& f, const FeasibleRegion& region, const Vec& start,
                          const SubsolverOptions& opt = {});

/// Convenience wrapper over FeasibleRegion::project.
Vec project(const Vec& point, const FeasibleRegion& region, double tol = 1e-10);

}  // namespace mipreg
