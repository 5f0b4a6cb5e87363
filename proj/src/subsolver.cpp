#include "mipreg/subsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mipreg {

namespace {

double checked_value(const Objective& f, const Vec& x) {
  const double v = f.value(x);
  if (!std::isfinite(v)) throw NonFiniteError("objective is not finite", x);
  return v;
}

Vec checked_gradient(const Objective& f, const Vec& x) {
  Vec g = f.gradient(x);
  if (g.size() != x.size()) throw std::invalid_argument("gradient has wrong dimension");
  if (!g.allFinite()) throw NonFiniteError("objective gradient is not finite", x);
  return g;
}

}  // namespace

double kkt_residual(const Vec& x, const Vec& gradient, const FeasibleRegion& region,
                    const ProjectionOptions& opt) {
  // A unit step from a large gradient lands far outside the region, where
  // Dykstra needs many cycles to build up its corrections. The step is cut
  // to the diameter and the residual rescaled; ||x - P(x - t g)|| / t only
  // grows as t shrinks, so this never reports a smaller residual.
  const double gnorm = gradient.norm();
  const double diam = region.diameter();
  const double t = std::isfinite(diam) && gnorm > diam ? diam / gnorm : 1.0;
  return (x - region.project(x - t * gradient, opt)).lpNorm<Eigen::Infinity>() / t;
}

Vec project(const Vec& point, const FeasibleRegion& region, double tol) {
  ProjectionOptions opt;
  opt.tol = tol;
  return region.project(point, opt);
}

SubproblemResult minimize(const Objective& f, const FeasibleRegion& region, const Vec& start,
                          const SubsolverOptions& opt) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("minimize: tol must be positive");
  if (start.size() != region.dim()) throw std::invalid_argument("minimize: start has wrong dimension");
  const double viol = region.max_violation(start);
  if (!(viol <= opt.start_tolerance)) {
    throw InfeasibleStartError("minimize: start violates constraints by " + std::to_string(viol),
                               start, viol);
  }

  SubproblemResult res;
  Vec x = start;
  double fx = checked_value(f, x);
  const double f_start = fx;
  Vec g = checked_gradient(f, x);
  const double diam = region.diameter();
  double step = 1.0;
  Vec x_prev, g_prev;

  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it;
    res.kkt_residual = kkt_residual(x, g, region, opt.projection);
    if (res.kkt_residual <= opt.tol) {
      res.converged = true;
      break;
    }

    if (it > 0) {
      const Vec s = x - x_prev;
      const Vec yk = g - g_prev;
      const double sy = s.dot(yk);
      step = sy > 0.0 ? s.squaredNorm() / sy : 1.0;
    }
    const double gnorm = g.norm();
    if (std::isfinite(diam) && gnorm > 0.0) step = std::min(step, diam / gnorm);
    if (!(step > 0.0) || !std::isfinite(step)) step = 1.0;

    // Near a minimizer the true decrease drops below the resolution of f, so
    // the sufficient-decrease test gets a rounding allowance. Steps never
    // take the value above the starting value.
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fx));
    bool accepted = false;
    Vec xn;
    double fn = fx;
    for (int bt = 0; bt < 60; ++bt) {
      xn = region.project(x - step * g, opt.projection);
      fn = checked_value(f, xn);
      if (fn <= fx + opt.armijo * g.dot(xn - x) + noise && fn <= f_start) {
        accepted = true;
        break;
      }
      step *= opt.backtrack;
    }
    if (!accepted || (xn - x).lpNorm<Eigen::Infinity>() == 0.0) break;

    x_prev = x;
    g_prev = g;
    x = std::move(xn);
    fx = fn;
    g = checked_gradient(f, x);
    res.iterations = it + 1;
  }
  if (!res.converged) {
    res.kkt_residual = kkt_residual(x, g, region, opt.projection);
    res.converged = res.kkt_residual <= opt.tol;
  }
  res.minimizer = std::move(x);
  res.objective = fx;
  return res;
}

}  // namespace mipreg
