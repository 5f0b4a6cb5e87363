#include "mipreg/alternating.hpp"

#include <cmath>
#include <exception>
#include <random>
#include <stdexcept>
#include <string>

namespace mipreg {

void MixedProblem::validate() const {
  if (n < 1) throw std::invalid_argument("MixedProblem: n must be at least 1");
  if (m < 0) throw std::invalid_argument("MixedProblem: m must be nonnegative");
  if (region.dim() != n + m) throw std::invalid_argument("MixedProblem: region dimension != n + m");
  if (!objective.value || !objective.gradient) throw std::invalid_argument("MixedProblem: objective missing");
  if (!blocks.empty()) {
    std::vector<int> hits(static_cast<std::size_t>(m), 0);
    for (const auto& b : blocks) {
      if (b.begin < 0 || b.size < 1 || b.begin + b.size > m) {
        throw std::invalid_argument("MixedProblem: block out of range");
      }
      for (Index j = b.begin; j < b.begin + b.size; ++j) ++hits[static_cast<std::size_t>(j)];
    }
    for (int h : hits) {
      if (h != 1) throw std::invalid_argument("MixedProblem: blocks must partition y");
    }
  }
  if (lipschitz && !(*lipschitz > 0.0)) throw std::invalid_argument("MixedProblem: lipschitz must be positive");
}

PenaltySchedule::PenaltySchedule(double lambda0, double rho) : lambda0_(lambda0), rho_(rho) {
  if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) throw std::invalid_argument("PenaltySchedule: lambda0 must be positive");
  if (!(rho > 1.0) || !std::isfinite(rho)) throw std::invalid_argument("PenaltySchedule: rho must exceed 1");
}

PenaltySchedule PenaltySchedule::constant(double lambda) {
  PenaltySchedule s(lambda, 2.0);
  s.rho_ = 1.0;
  return s;
}

double PenaltySchedule::lambda() const { return lambda0_ * std::pow(rho_, t_); }

double penalized_value(const MixedProblem& p, const Vec& z, const Vec& a, double lambda) {
  return p.objective.value(z) + lambda * kernel::unit_penalty(z.head(p.n), a);
}

namespace {

std::vector<Index> range(Index begin, Index size) {
  std::vector<Index> idx(static_cast<std::size_t>(size));
  for (Index j = 0; j < size; ++j) idx[static_cast<std::size_t>(j)] = begin + j;
  return idx;
}

// Minimizes `objective` (defined on the full z) over the coordinates in idx
// with the rest of z held fixed. Returns the updated z and the KKT residual.
Vec block_minimize(const Objective& objective, const FeasibleRegion& region, const Vec& z,
                   const std::vector<Index>& idx, const SubsolverOptions& opt, double* kkt) {
  auto embed = [z, idx](const Vec& w) {
    Vec full = z;
    for (std::size_t j = 0; j < idx.size(); ++j) full[idx[j]] = w[static_cast<Index>(j)];
    return full;
  };
  Objective restricted{
      [&objective, embed](const Vec& w) { return objective.value(embed(w)); },
      [&objective, embed, idx](const Vec& w) -> Vec {
        const Vec g = objective.gradient(embed(w));
        Vec out(static_cast<Index>(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) out[static_cast<Index>(j)] = g[idx[j]];
        return out;
      }};
  Vec start(static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) start[static_cast<Index>(j)] = z[idx[j]];
  const FeasibleRegion sub = region.slice(idx, z);
  const SubproblemResult r = minimize(restricted, sub, start, opt);
  if (kkt) *kkt = r.kkt_residual;
  return embed(r.minimizer);
}

double checked(double v, const Vec& z, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteError(std::string("penalized objective not finite ") + what, z);
  return v;
}

SolveTrace run(const MixedProblem& problem, PenaltySchedule schedule, const SolveOptions& opt,
               bool per_block) {
  problem.validate();
  if (!(opt.epsilon > 0.0) || !(opt.stop_tol > 0.0) || opt.max_outer < 1) {
    throw std::invalid_argument("solve: epsilon, stop_tol and max_outer must be positive");
  }
  const Index n = problem.n, m = problem.m;

  SolveTrace trace;
  if (opt.check_convexity) {
    trace.convexity_violations = check_block_convexity(problem, 200, 0x5eed).violations;
  }

  Vec z;
  if (opt.start) {
    z = *opt.start;
    if (z.size() != n + m) throw std::invalid_argument("solve: start has wrong dimension");
  } else {
    z = problem.region.project(Vec::Zero(n + m), opt.subsolver.projection);
  }
  Vec a = opt.start_a ? *opt.start_a : Vec::Zero(n);
  if (a.size() != n) throw std::invalid_argument("solve: start_a has wrong dimension");

  // The y-step visits these in order.
  struct Step {
    std::vector<Index> idx;
    std::function<Vec(const Vec&)> exact;
  };
  std::vector<Step> ysteps;
  if (m > 0) {
    if (per_block && !problem.blocks.empty()) {
      for (const auto& b : problem.blocks) ysteps.push_back({range(n + b.begin, b.size), b.exact});
    } else {
      ysteps.push_back({range(n, m), problem.exact_y});
    }
  }
  const std::vector<Index> xidx = range(0, n);
  const double lambda_cap = opt.lambda_cap_factor * schedule.lambda0();

  for (int t = 0; t < opt.max_outer; ++t) {
    const double lambda = std::min(schedule.lambda(), lambda_cap);
    IterationRecord rec;
    rec.t = t;
    rec.lambda = lambda;
    const Vec z_prev = z, a_prev = a;

    try {
      rec.value_start = checked(penalized_value(problem, z, a, lambda), z, "at iteration start");

      // y-step: the penalty does not involve y, so f alone is minimized.
      for (const auto& step : ysteps) {
        if (step.exact) {
          const Vec vals = step.exact(z);
          Vec cand = z;
          for (std::size_t j = 0; j < step.idx.size(); ++j) cand[step.idx[j]] = vals[static_cast<Index>(j)];
          if (problem.objective.value(cand) <= problem.objective.value(z)) z = std::move(cand);
        } else {
          z = block_minimize(problem.objective, problem.region, z, step.idx, opt.subsolver, nullptr);
        }
      }
      rec.value_after_y = checked(penalized_value(problem, z, a, lambda), z, "after y-step");

      // x-step over [0,1]^n intersected with the region slice at the current y.
      const Vec pen_grad = lambda * kernel::unit_penalty_gradient(a);
      Objective lx{[&problem, &a, lambda, n](const Vec& w) {
                     return problem.objective.value(w) + lambda * kernel::unit_penalty(w.head(n), a);
                   },
                   [&problem, &pen_grad, n](const Vec& w) -> Vec {
                     Vec g = problem.objective.gradient(w);
                     g.head(n) += pen_grad;
                     return g;
                   }};
      z = block_minimize(lx, problem.region, z, xidx, opt.subsolver, &rec.x_kkt);
      rec.value_after_x = checked(penalized_value(problem, z, a, lambda), z, "after x-step");

      a = kernel::threshold(z.head(n));
      rec.value_after_a = checked(penalized_value(problem, z, a, lambda), z, "after a-step");
    } catch (const std::exception& e) {
      std::throw_with_nested(IterationError("iteration " + std::to_string(t) + ": " + e.what(), t));
    }

    rec.f = problem.objective.value(z);
    rec.distance = kernel::distance(z.head(n));
    rec.step_change = std::max((z - z_prev).lpNorm<Eigen::Infinity>(),
                               (a - a_prev).lpNorm<Eigen::Infinity>());
    trace.records.push_back(rec);
    trace.iterations = t + 1;
    trace.final_lambda = lambda;

    const bool binary = rec.distance <= opt.epsilon;
    if (binary && !trace.first_binary) trace.first_binary = t;
    if (binary && rec.step_change <= opt.stop_tol) {
      trace.converged = true;
      break;
    }
    if (!schedule.is_constant()) {
      if (schedule.lambda() >= lambda_cap && !binary) {
        throw SolverError("lambda reached its cap " + std::to_string(lambda_cap) +
                          " without a binary iterate (d(x) = " + std::to_string(rec.distance) + ")");
      }
      schedule.advance();
    }
  }

  trace.x = z.head(n);
  trace.y = z.tail(m);
  trace.a = a;
  trace.binary = kernel::distance(trace.x) <= opt.epsilon;
  trace.final_f = problem.objective.value(z);
  trace.final_value = penalized_value(problem, z, a, trace.final_lambda);
  return trace;
}

}  // namespace

SolveTrace solve(const MixedProblem& problem, PenaltySchedule schedule, const SolveOptions& opt) {
  return run(problem, schedule, opt, false);
}

SolveTrace solve_multiblock(const MixedProblem& problem, PenaltySchedule schedule,
                            const SolveOptions& opt) {
  return run(problem, schedule, opt, true);
}

int iteration_bound(double L, Index n, double epsilon, double lambda0, double rho) {
  if (!(L > 0.0) || n < 1 || !(epsilon > 0.0) || !(lambda0 > 0.0) || !(rho > 1.0)) {
    throw std::invalid_argument("iteration_bound: arguments must be positive and rho > 1");
  }
  const double v = (std::log(L * std::sqrt(static_cast<double>(n))) - std::log(epsilon * lambda0)) /
                   std::log(rho);
  // Absorb rounding so that lambda0 = L sqrt(n) / epsilon gives exactly 0.
  const double c = std::ceil(v - 1e-9);
  return c > 0.0 ? static_cast<int>(c) : 0;
}

double lambda_threshold(double L) {
  if (!(L > 0.0)) throw std::invalid_argument("lambda_threshold: L must be positive");
  return L;
}

ConvexityReport check_block_convexity(const MixedProblem& problem, int samples, std::uint64_t seed,
                                      double tol) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto& reg = problem.region;
  auto random_point = [&] {
    Vec p(reg.dim());
    for (Index i = 0; i < p.size(); ++i) {
      const double lo = reg.lower()[i], hi = reg.upper()[i];
      p[i] = std::isfinite(lo) && std::isfinite(hi) ? lo + (hi - lo) * unif(eng) : gauss(eng);
    }
    return reg.project(p);
  };

  std::vector<std::vector<Index>> blocks{range(0, problem.n)};
  if (problem.blocks.empty()) {
    if (problem.m > 0) blocks.push_back(range(problem.n, problem.m));
  } else {
    for (const auto& b : problem.blocks) blocks.push_back(range(problem.n + b.begin, b.size));
  }

  ConvexityReport rep;
  for (int s = 0; s < samples; ++s) {
    const Vec p = random_point(), q = random_point();
    for (const auto& idx : blocks) {
      Vec r = p;
      for (Index i : idx) r[i] = q[i];
      const Vec mid = 0.5 * (p + r);
      const double fp = problem.objective.value(p), fr = problem.objective.value(r);
      const double gap = problem.objective.value(mid) - 0.5 * (fp + fr);
      ++rep.samples;
      if (gap > tol * (1.0 + std::abs(fp) + std::abs(fr))) {
        ++rep.violations;
        rep.worst = std::max(rep.worst, gap);
      }
    }
  }
  return rep;
}

}  // namespace mipreg
