#include "mipreg/rat/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace mipreg::rat {

namespace {

bool on_rat1(const RatInstance& inst, int k) { return inst.rat_of[static_cast<std::size_t>(k)] == 1; }

struct Loads {
  double n1 = 0, v1 = 0, n2 = 0, v2 = 0;
};

Loads loads(const RatInstance& inst, const Vec& x, double scale) {
  Loads s;
  for (int i = 0; i < inst.I; ++i) {
    for (int k = 0; k < inst.K; ++k) {
      const double xv = x[var(inst, i, k)];
      const double r = inst.rate(i, k) * scale;
      if (on_rat1(inst, k)) {
        s.n1 += inst.alpha[i] * xv;
        s.v1 += xv / r;
      } else {
        s.n2 += inst.alpha[i] * r * xv;
        s.v2 += xv;
      }
    }
  }
  return s;
}

// Least load a technology can carry on the relaxed region (C3 with the other
// technology at capacity).
double min_load(const RatInstance& inst, int m) {
  const int other = 3 - m;
  long cap = 0;
  for (int k : inst.stations_of(other)) cap += inst.k_max[static_cast<std::size_t>(k)];
  cap = std::min<long>(cap, inst.n_max[static_cast<std::size_t>(other - 1)]);
  return std::max(0.0, static_cast<double>(inst.I - cap));
}

// Concave square root continued linearly below the knee so that it stays
// finite with a finite slope at 0.
double soft_sqrt(double n, double knee) { return n >= knee ? std::sqrt(n) : n / std::sqrt(knee); }
double soft_sqrt_slope(double n, double knee) {
  return n >= knee ? 0.5 / std::sqrt(n) : 1.0 / std::sqrt(knee);
}

}  // namespace

FeasibleRegion assignment_region(const RatInstance& inst, const FormulationOptions& opt,
                                 const Vec& extra_lower, const Vec& extra_upper) {
  const Index n = static_cast<Index>(inst.I) * inst.K;
  const Index e = extra_lower.size();
  if (extra_upper.size() != e) throw std::invalid_argument("assignment_region: extra bounds differ in length");
  Vec lo(n + e), hi(n + e);
  lo << Vec::Zero(n), extra_lower;
  hi << Vec::Ones(n), extra_upper;
  FeasibleRegion reg(lo, hi);

  for (int i = 0; i < inst.I; ++i) {
    SparseRow r;
    r.name = fmt::format("C3 user {}", i);
    for (int k = 0; k < inst.K; ++k) {
      r.index.push_back(var(inst, i, k));
      r.coef.push_back(1.0);
    }
    r.rhs = 1.0;
    reg.add_equality(std::move(r));
  }
  // Rows implied by the box and C3 are left out.
  for (int m = 1; m <= 2; ++m) {
    const auto stations = inst.stations_of(m);
    if (inst.n_max[static_cast<std::size_t>(m - 1)] < inst.I) {
      SparseRow r;
      r.name = fmt::format("C2 RAT-{}", m);
      for (int i = 0; i < inst.I; ++i)
        for (int k : stations) {
          r.index.push_back(var(inst, i, k));
          r.coef.push_back(1.0);
        }
      r.rhs = inst.n_max[static_cast<std::size_t>(m - 1)];
      reg.add_linear_inequality(std::move(r));
    }
    // C1: RAT-1 sum x (1 - w1max / r) <= 0, RAT-2 sum x (r - w2max) <= 0.
    SparseRow c1;
    c1.name = fmt::format("C1 RAT-{}", m);
    bool can_bind = false;
    const double wmax = inst.w_max[static_cast<std::size_t>(m - 1)];
    for (int i = 0; i < inst.I; ++i)
      for (int k : stations) {
        const double r = inst.rate(i, k);
        const double c = m == 1 ? 1.0 - wmax / r : (r - wmax) * opt.rate_scale;
        c1.index.push_back(var(inst, i, k));
        c1.coef.push_back(c);
        can_bind = can_bind || c > 0.0;
      }
    if (can_bind) reg.add_linear_inequality(std::move(c1));
  }
  for (int k = 0; k < inst.K; ++k) {
    if (inst.k_max[static_cast<std::size_t>(k)] >= inst.I) continue;
    SparseRow r;
    r.name = fmt::format("C4 station {}", k);
    for (int i = 0; i < inst.I; ++i) {
      r.index.push_back(var(inst, i, k));
      r.coef.push_back(1.0);
    }
    r.rhs = inst.k_max[static_cast<std::size_t>(k)];
    reg.add_linear_inequality(std::move(r));
  }
  return reg;
}

double relaxed_throughput(const RatInstance& inst, const Vec& x, double scale) {
  const Loads s = loads(inst, x, scale);
  return (s.v1 > 0.0 ? s.n1 / s.v1 : 0.0) + (s.v2 > 0.0 ? s.n2 / s.v2 : 0.0);
}

Vec relaxed_throughput_gradient(const RatInstance& inst, const Vec& x, double scale) {
  const Loads s = loads(inst, x, scale);
  Vec g = Vec::Zero(x.size());
  for (int i = 0; i < inst.I; ++i)
    for (int k = 0; k < inst.K; ++k) {
      const double r = inst.rate(i, k) * scale;
      if (on_rat1(inst, k)) {
        if (s.v1 > 0.0) g[var(inst, i, k)] = inst.alpha[i] / s.v1 - s.n1 / (s.v1 * s.v1 * r);
      } else {
        if (s.v2 > 0.0) g[var(inst, i, k)] = inst.alpha[i] * r / s.v2 - s.n2 / (s.v2 * s.v2);
      }
    }
  return g;
}

MixedProblem build_multiconvex(const RatInstance& inst, const FormulationOptions& opt) {
  inst.validate();
  const Index n = static_cast<Index>(inst.I) * inst.K;
  const double amax = inst.alpha.maxCoeff();
  const double knee = opt.sqrt_knee;

  // s_m = sqrt(N_m)/V_m is bounded through N_m <= alpha_max r_max V_m and the
  // least possible load of technology m.
  Vec s_hi(2);
  for (int m = 1; m <= 2; ++m) {
    const double rmax = inst.max_rate(m) * opt.rate_scale;
    const double nmin = min_load(inst, m);
    const double vmin = m == 1 ? nmin / rmax : nmin;
    s_hi[m - 1] = 1.5 * (nmin > 0.0 ? std::sqrt(amax * rmax / vmin) : amax * rmax / std::sqrt(knee));
  }

  MixedProblem p;
  p.n = n;
  p.m = 2;
  p.region = assignment_region(inst, opt, Vec::Zero(2), s_hi);
  const double scale = opt.rate_scale;

  p.objective.value = [inst, scale, knee, n](const Vec& z) {
    const Loads s = loads(inst, z.head(n), scale);
    const double s1 = z[n], s2 = z[n + 1];
    return -(2.0 * s1 * soft_sqrt(s.n1, knee) - s1 * s1 * s.v1) - (2.0 * s2 * soft_sqrt(s.n2, knee) - s2 * s2 * s.v2);
  };
  p.objective.gradient = [inst, scale, knee, n](const Vec& z) -> Vec {
    const Loads s = loads(inst, z.head(n), scale);
    const double s1 = z[n], s2 = z[n + 1];
    const double c1 = 2.0 * s1 * soft_sqrt_slope(s.n1, knee);
    const double c2 = 2.0 * s2 * soft_sqrt_slope(s.n2, knee);
    Vec g(n + 2);
    for (int i = 0; i < inst.I; ++i)
      for (int k = 0; k < inst.K; ++k) {
        const double r = inst.rate(i, k) * scale;
        g[var(inst, i, k)] = on_rat1(inst, k) ? -(c1 * inst.alpha[i] - s1 * s1 / r)
                                              : -(c2 * inst.alpha[i] * r - s2 * s2);
      }
    g[n] = -2.0 * soft_sqrt(s.n1, knee) + 2.0 * s1 * s.v1;
    g[n + 1] = -2.0 * soft_sqrt(s.n2, knee) + 2.0 * s2 * s.v2;
    return g;
  };

  auto best_s = [inst, scale, knee, n, s_hi](const Vec& z) -> Vec {
    const Loads s = loads(inst, z.head(n), scale);
    Vec out(2);
    out[0] = s.v1 > 0.0 ? std::min(soft_sqrt(s.n1, knee) / s.v1, s_hi[0]) : 0.0;
    out[1] = s.v2 > 0.0 ? std::min(soft_sqrt(s.n2, knee) / s.v2, s_hi[1]) : 0.0;
    return out;
  };
  ContinuousBlock b1{0, 1, "s1", nullptr}, b2{1, 1, "s2", nullptr};
  if (opt.closed_form_blocks) {
    p.exact_y = best_s;
    b1.exact = [best_s](const Vec& z) -> Vec { return best_s(z).head(1); };
    b2.exact = [best_s](const Vec& z) -> Vec { return best_s(z).tail(1); };
  }
  p.blocks = {b1, b2};
  if (inst.I > inst.n_max[0]) p.lipschitz = lipschitz_constant(inst) * opt.rate_scale;
  return p;
}

LiftedPoint lifted_point(const RatInstance& inst, const Vec& x, double scale) {
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> xm(
      x.data(), inst.I, inst.K);
  const AuxiliaryVariables aux = auxiliary_from(inst, Eigen::MatrixXd(xm), scale);
  return {x, aux.u, aux.v1, aux.v2};
}

LiftedValue lifted(const RatInstance& inst, const LiftedPoint& p, double scale) {
  (void)scale;  // the point already carries scaled u and v
  LiftedValue out;
  out.grad_x = Vec::Zero(p.x.size());
  out.grad_u = Vec::Zero(inst.I);
  for (int i = 0; i < inst.I; ++i) {
    const double a = inst.alpha[i];
    for (int k = 0; k < inst.K; ++k) {
      const double xv = p.x[var(inst, i, k)];
      if (on_rat1(inst, k)) {
        out.value += a * xv / p.v1;
        out.grad_x[var(inst, i, k)] = a / p.v1;
        out.grad_v1 -= a * xv / (p.v1 * p.v1);
      } else {
        out.value += a * xv * p.u[i] / p.v2;
        out.grad_x[var(inst, i, k)] = a * p.u[i] / p.v2;
        out.grad_u[i] += a * xv / p.v2;
        out.grad_v2 -= a * xv * p.u[i] / (p.v2 * p.v2);
      }
    }
  }
  return out;
}

DCParts dc_parts(const RatInstance& inst, const LiftedPoint& p, double scale) {
  (void)scale;
  DCParts d;
  for (LiftedValue* e : {&d.fa, &d.fb}) {
    e->grad_x = Vec::Zero(p.x.size());
    e->grad_u = Vec::Zero(inst.I);
  }
  const double w1 = 1.0 / p.v1;
  for (int i = 0; i < inst.I; ++i) {
    const double a = inst.alpha[i];
    const double u = p.u[i];
    for (int k = 0; k < inst.K; ++k) {
      const Index j = var(inst, i, k);
      const double xv = p.x[j];
      if (on_rat1(inst, k)) {
        // fa: a/2 (x + 1/v1)^2     fb: a/2 (x^2 + 1/v1^2)
        d.fa.value += 0.5 * a * (xv + w1) * (xv + w1);
        d.fa.grad_x[j] = a * (xv + w1);
        d.fa.grad_v1 -= a * (xv + w1) * w1 * w1;
        d.fb.value += 0.5 * a * (xv * xv + w1 * w1);
        d.fb.grad_x[j] = a * xv;
        d.fb.grad_v1 -= a * w1 * w1 * w1;
      } else {
        // fa: a (x + u)^2 / (2 v2)  fb: a (x^2 + u^2) / (2 v2)
        const double su = xv + u;
        d.fa.value += 0.5 * a * su * su / p.v2;
        d.fa.grad_x[j] = a * su / p.v2;
        d.fa.grad_u[i] += a * su / p.v2;
        d.fa.grad_v2 -= 0.5 * a * su * su / (p.v2 * p.v2);
        const double q = xv * xv + u * u;
        d.fb.value += 0.5 * a * q / p.v2;
        d.fb.grad_x[j] = a * xv / p.v2;
        d.fb.grad_u[i] += a * u / p.v2;
        d.fb.grad_v2 -= 0.5 * a * q / (p.v2 * p.v2);
      }
    }
  }
  return d;
}

namespace {

// Gradient in x of g(x, u(x), v(x)) given the partial derivatives of g.
Vec compose_gradient(const RatInstance& inst, const LiftedValue& e, double scale) {
  Vec g = e.grad_x;
  for (int i = 0; i < inst.I; ++i)
    for (int k = 0; k < inst.K; ++k) {
      const double r = inst.rate(i, k) * scale;
      const Index j = var(inst, i, k);
      if (on_rat1(inst, k)) {
        g[j] += e.grad_v1 / r;
      } else {
        g[j] += e.grad_u[i] * r + e.grad_v2;
      }
    }
  return g;
}

}  // namespace

DCProblem build_dc(const RatInstance& inst, const FormulationOptions& opt) {
  inst.validate();
  const double scale = opt.rate_scale;
  DCProblem p;
  p.n = static_cast<Index>(inst.I) * inst.K;
  p.m = 0;
  p.region = assignment_region(inst, opt);
  // v1 >= floor and v2 >= floor as linear rows in x.
  SparseRow f1, f2;
  f1.name = "v1 floor";
  f2.name = "v2 floor";
  for (int i = 0; i < inst.I; ++i)
    for (int k = 0; k < inst.K; ++k) {
      SparseRow& row = on_rat1(inst, k) ? f1 : f2;
      row.index.push_back(var(inst, i, k));
      row.coef.push_back(on_rat1(inst, k) ? -1.0 / (inst.rate(i, k) * scale) : -1.0);
    }
  f1.rhs = f2.rhs = -opt.v_floor;
  p.region.add_linear_inequality(std::move(f1));
  p.region.add_linear_inequality(std::move(f2));

  // Minimizing -(fa - fb) = fb - fa: the split's fb is the convex part and
  // its fa is the part that gets linearized.
  auto part = [inst, scale](bool take_fa) {
    Objective o;
    o.value = [inst, scale, take_fa](const Vec& x) {
      const DCParts d = dc_parts(inst, lifted_point(inst, x, scale), scale);
      return take_fa ? d.fa.value : d.fb.value;
    };
    o.gradient = [inst, scale, take_fa](const Vec& x) -> Vec {
      const DCParts d = dc_parts(inst, lifted_point(inst, x, scale), scale);
      return compose_gradient(inst, take_fa ? d.fa : d.fb, scale);
    };
    return o;
  };
  p.objective.fa = part(false);
  p.objective.fb = part(true);
  return p;
}

double lipschitz_constant(const RatInstance& inst) {
  const int n1 = inst.n_max[0];
  if (inst.I <= n1) {
    throw std::invalid_argument(fmt::format(
        "lipschitz_constant: I = {} must exceed N_max of RAT-1 = {}; the default parameterization "
        "N_max = I - 1 makes the denominator 1",
        inst.I, n1));
  }
  const double amax = inst.alpha.maxCoeff();
  return std::sqrt(static_cast<double>(inst.I)) * amax *
         std::abs(inst.max_rate(1) - inst.min_rate(2) / static_cast<double>(inst.I - n1));
}

double gradient_bound(const RatInstance& inst) {
  const double amax = inst.alpha.maxCoeff();
  const double n1 = min_load(inst, 1), n2 = min_load(inst, 2);
  if (n1 <= 0.0 || n2 <= 0.0) return std::numeric_limits<double>::infinity();
  const double r1max = inst.max_rate(1), r1min = inst.min_rate(1), r2max = inst.max_rate(2);
  // RAT-1 entries: |alpha_i - w1/r| / V1 with w1 <= alpha_max r1max and V1 >= n1/r1max.
  const double b1 = amax * r1max * r1max / (r1min * n1);
  // RAT-2 entries: |alpha_i r - w2| / V2 with w2 <= alpha_max r2max and V2 >= n2.
  const double b2 = amax * r2max / n2;
  const double c1 = static_cast<double>(inst.I) * static_cast<double>(inst.stations_of(1).size());
  const double c2 = static_cast<double>(inst.I) * static_cast<double>(inst.stations_of(2).size());
  return std::sqrt(c1 * b1 * b1 + c2 * b2 * b2);
}

}  // namespace mipreg::rat
