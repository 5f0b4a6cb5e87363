#pragma once

// Relaxed formulations of the assignment problem for the two solvers.
//
// Variables: x is row-major I x K (index i*K + k). Solver objectives are in
// units of rate_scale * bits/s (Mbit/s by default) and are minimized, so
// they carry the negated throughput.

#include "mipreg/dc.hpp"
#include "mipreg/rat/instance.hpp"

namespace mipreg::rat {

struct FormulationOptions {
  double rate_scale = 1e-6;
  /// Lower bound kept on v1, v2 in the DC form.
  double v_floor = 1e-6;
  /// Below this load the square root is continued linearly through 0.
  double sqrt_knee = 1e-9;
  /// Give the continuous blocks their closed-form minimizers.
  bool closed_form_blocks = true;
};

inline Index var(const RatInstance& inst, int i, int k) { return static_cast<Index>(i) * inst.K + k; }

/// [0,1]^(I K) box with C3 rows, C2 and C4 caps, and C1 in its cross-
/// multiplied linear form. `extra` continuous variables with the given
/// bounds are appended after x.
FeasibleRegion assignment_region(const RatInstance& inst, const FormulationOptions& opt,
                                 const Vec& extra_lower = Vec(), const Vec& extra_upper = Vec());

/// N1/V1 + N2/V2 evaluated on a relaxed x, where N1 = sum alpha x and
/// V1 = sum x/r over RAT-1, N2 = sum alpha r x and V2 = sum x over RAT-2.
/// Agrees with aggregate_throughput on binary x. Empty loads contribute 0.
double relaxed_throughput(const RatInstance& inst, const Vec& x, double scale = 1.0);
Vec relaxed_throughput_gradient(const RatInstance& inst, const Vec& x, double scale = 1.0);

/// Problem for the alternating solver: minimize over (x, s1, s2)
///   -sum_m [2 s_m sqrt(N_m(x)) - s_m^2 V_m(x)],
/// which is convex in x for fixed s and in each s_m for fixed x. The
/// minimizing s_m is sqrt(N_m)/V_m, where the value equals -(N1/V1 + N2/V2).
MixedProblem build_multiconvex(const RatInstance& inst, const FormulationOptions& opt = {});

/// The (x, u, v) objective sum_i alpha_i/v1 sum_K1 x + sum_i alpha_i/v2 sum_K2 x u_i.
struct LiftedPoint {
  Vec x;  // I*K
  Vec u;  // I
  double v1 = 0.0, v2 = 0.0;
};

struct LiftedValue {
  double value = 0.0;
  Vec grad_x, grad_u;
  double grad_v1 = 0.0, grad_v2 = 0.0;
};

LiftedValue lifted(const RatInstance& inst, const LiftedPoint& p, double scale = 1.0);

/// The consistent point: u, v computed from x.
LiftedPoint lifted_point(const RatInstance& inst, const Vec& x, double scale = 1.0);

/// The throughput-maximizing split f = fa - fb on (x, u, v), both convex for
/// v > 0. Gradients are with respect to (x, u, v1, v2).
struct DCParts {
  LiftedValue fa, fb;
};
DCParts dc_parts(const RatInstance& inst, const LiftedPoint& p, double scale = 1.0);

/// DC problem on x alone, minimizing the negated throughput. (u, v) are
/// substituted from x, so the convex part is the composite of the split's
/// fb and the subtracted part is the composite of its fa. The region adds
/// v1, v2 >= v_floor.
DCProblem build_dc(const RatInstance& inst, const FormulationOptions& opt = {});

/// sqrt(I) alpha_max |r1_max - r2_min / (I - N1_max)| in bits/s. Throws
/// std::invalid_argument when I <= N1_max.
double lipschitz_constant(const RatInstance& inst);

/// A provable bound on ||grad relaxed_throughput|| over the relaxed region
/// in bits/s; +inf when a technology may carry zero load.
double gradient_bound(const RatInstance& inst);

}  // namespace mipreg::rat
