#include "mipreg/dc.hpp"

#include <cmath>
#include <exception>
#include <string>

namespace mipreg {

LinearizationAnchor LinearizationAnchor::at(const Objective& fb, const Vec& point) {
  LinearizationAnchor a;
  a.point = point;
  a.value = fb.value(point);
  a.gradient = fb.gradient(point);
  if (!std::isfinite(a.value) || !a.gradient.allFinite()) {
    throw NonFiniteError("linearization anchor has non-finite data", point);
  }
  return a;
}

AffineFunction linearize(const LinearizationAnchor& anchor) {
  return {anchor.value, anchor.gradient, anchor.point};
}

AffineFunction linearize(const Objective& fb, const Vec& anchor) {
  return linearize(LinearizationAnchor::at(fb, anchor));
}

double original_violation(const FeasibleRegion& region, const std::vector<DCConstraint>& dc,
                          const Vec& z) {
  double v = region.max_violation(z);
  for (const auto& c : dc) v = std::max(v, c.value(z));
  return v;
}

FeasibleRegion convexify_region(const FeasibleRegion& region, const std::vector<DCConstraint>& dc,
                                const Vec& anchor, double tol) {
  const double viol = original_violation(region, dc, anchor);
  if (!(viol <= tol)) {
    throw InfeasibleStartError("convexify_region: anchor violates the original constraints by " +
                                   std::to_string(viol),
                               anchor, viol);
  }
  FeasibleRegion out = region;
  for (const auto& c : dc) {
    const AffineFunction lin = linearize(c.gb, anchor);
    ConvexInequality g;
    g.name = c.name;
    g.value = [ga = c.ga, lin](const Vec& z) { return ga.value(z) - lin(z); };
    g.gradient = [ga = c.ga, lin](const Vec& z) -> Vec { return ga.gradient(z) - lin.g; };
    out.add_inequality(std::move(g));
  }
  return out;
}

double linearized_lipschitz(double L, const Vec& grad_fb_x) {
  if (!(L > 0.0)) throw std::invalid_argument("linearized_lipschitz: L must be positive");
  return L + grad_fb_x.norm();
}

namespace {

MixedProblem inner_problem(const DCProblem& p, const FeasibleRegion& region,
                           const std::optional<AffineFunction>& lin) {
  MixedProblem mp;
  mp.n = p.n;
  mp.m = p.m;
  mp.region = region;
  mp.blocks = p.blocks;
  if (lin) {
    mp.objective.value = [fa = p.objective.fa, l = *lin](const Vec& z) { return fa.value(z) - l(z); };
    mp.objective.gradient = [fa = p.objective.fa, l = *lin](const Vec& z) -> Vec {
      return fa.gradient(z) - l.g;
    };
    if (p.lipschitz_a) mp.lipschitz = linearized_lipschitz(*p.lipschitz_a, lin->g.head(p.n));
  } else {
    mp.objective = p.objective.fa;
    mp.lipschitz = p.lipschitz_a;
  }
  return mp;
}

}  // namespace

DCResult dc_solve(const DCProblem& problem, const PenaltySchedule& schedule, const Vec& start,
                  const DCOptions& opt) {
  const Index n = problem.n;
  if (start.size() != n + problem.m) throw std::invalid_argument("dc_solve: start has wrong dimension");
  const double viol = original_violation(problem.region, problem.dc_constraints, start);
  if (!(viol <= opt.feasibility_tol)) {
    throw InfeasibleStartError("dc_solve: initial point violates constraints by " + std::to_string(viol),
                               start, viol);
  }
  const auto penalized = [&](const Vec& z, const Vec& a, double lambda) {
    return problem.objective.value(z) + lambda * kernel::unit_penalty(z.head(n), a);
  };

  DCResult res;
  Vec anchor = start;
  Vec a = kernel::threshold(start.head(n));
  double value = penalized(anchor, a, schedule.lambda0());
  res.initial_value = value;

  const bool convex_case = !problem.objective.has_fb() && problem.dc_constraints.empty();
  int small_steps = 0;
  for (int l = 0; l < opt.max_outer_dc; ++l) {
    SolveTrace tr;
    std::optional<double> inner_L;
    try {
      const FeasibleRegion region =
          convexify_region(problem.region, problem.dc_constraints, anchor, opt.feasibility_tol);
      std::optional<AffineFunction> lin;
      if (problem.objective.has_fb()) lin = linearize(problem.objective.fb, anchor);
      const MixedProblem mp = inner_problem(problem, region, lin);
      inner_L = mp.lipschitz;
      SolveOptions in = opt.inner;
      in.start = anchor;
      in.start_a = a;
      tr = solve_multiblock(mp, schedule, in);
    } catch (const std::exception& e) {
      std::throw_with_nested(IterationError("outer iteration " + std::to_string(l) + ": " + e.what(), l));
    }

    Vec cand(n + problem.m);
    cand << tr.x, tr.y;
    DCOuterRecord rec;
    rec.l = l;
    rec.f = problem.objective.value(cand);
    rec.value = penalized(cand, tr.a, tr.final_lambda);
    rec.inner_iterations = tr.iterations;
    rec.inner_lipschitz = inner_L;
    rec.accepted = rec.value <= value &&
                   original_violation(problem.region, problem.dc_constraints, cand) <= opt.feasibility_tol;
    res.outer.push_back(rec);
    if (!rec.accepted) break;

    const double improvement = value - rec.value;
    anchor = cand;
    a = tr.a;
    value = rec.value;
    res.inner = std::move(tr);
    if (convex_case) {
      res.converged = true;
      break;
    }
    small_steps = improvement < opt.outer_tol ? small_steps + 1 : 0;
    if (small_steps >= opt.patience) {
      res.converged = true;
      break;
    }
  }
  if (!res.outer.empty() && !res.outer.back().accepted) res.converged = true;

  res.x = anchor.head(n);
  res.y = anchor.tail(problem.m);
  res.a = a;
  res.final_value = value;
  res.final_f = problem.objective.value(anchor);
  return res;
}

}  // namespace mipreg
