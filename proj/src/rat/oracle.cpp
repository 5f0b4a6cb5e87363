#include "mipreg/rat/oracle.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <omp.h>

namespace mipreg::rat {

namespace {

long long total_count(const RatInstance& inst) {
  const double total = std::pow(static_cast<double>(inst.K), inst.I);
  if (total > kOracleLimit) {
    throw OracleSizeError(fmt::format(
        "exhaustive_oracle: K^I = {}^{} = {:.3g} exceeds the limit {:.0e}; use sampling-based bounds "
        "for instances this large",
        inst.K, inst.I, total, kOracleLimit));
  }
  return static_cast<long long>(total);
}

// Scratch buffers for one worker. Feasibility and value follow
// check_constraints and aggregate_throughput operation for operation so
// the oracle agrees with them bit for bit.
struct Evaluator {
  const RatInstance& inst;
  std::vector<int> per_station;
  std::vector<double> inv_rate;  // I x K, row-major

  explicit Evaluator(const RatInstance& in) : inst(in), per_station(static_cast<std::size_t>(in.K)) {
    inv_rate.resize(static_cast<std::size_t>(in.I) * in.K);
    for (int i = 0; i < in.I; ++i)
      for (int k = 0; k < in.K; ++k) inv_rate[static_cast<std::size_t>(i) * in.K + k] = 1.0 / in.rate(i, k);
  }

  // NaN when infeasible.
  double operator()(const Assignment& a) {
    std::fill(per_station.begin(), per_station.end(), 0);
    int c1 = 0, c2 = 0;
    double v1 = 0.0;
    for (int i = 0; i < inst.I; ++i) {
      const int k = a[static_cast<std::size_t>(i)];
      ++per_station[static_cast<std::size_t>(k)];
      if (inst.rat_of[static_cast<std::size_t>(k)] == 1) {
        ++c1;
        v1 += inv_rate[static_cast<std::size_t>(i) * inst.K + k];
      } else {
        ++c2;
      }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (c1 > inst.n_max[0] || c2 > inst.n_max[1]) return nan;
    for (int k = 0; k < inst.K; ++k)
      if (per_station[static_cast<std::size_t>(k)] > inst.k_max[static_cast<std::size_t>(k)]) return nan;
    double w1 = 0.0, w2 = 0.0;
    for (int i = 0; i < inst.I; ++i) {
      const int k = a[static_cast<std::size_t>(i)];
      if (inst.rat_of[static_cast<std::size_t>(k)] == 1) {
        w1 += 1.0 / v1;
      } else {
        w2 += inst.rate(i, k) / c2;
      }
    }
    constexpr double rel_tol = 1e-9;
    if (w1 > inst.w_max[0] * (1.0 + rel_tol) || w2 > inst.w_max[1] * (1.0 + rel_tol)) return nan;
    return aggregate_throughput(inst, a);
  }
};

void set_digits(Assignment& a, long long index, int K) {
  for (auto it = a.rbegin(); it != a.rend(); ++it) {
    *it = static_cast<int>(index % K);
    index /= K;
  }
}

void next_digits(Assignment& a, int K) {
  for (auto it = a.rbegin(); it != a.rend(); ++it) {
    if (++*it < K) return;
    *it = 0;
  }
}

struct Best {
  long long index = -1;
  double value = -std::numeric_limits<double>::infinity();
  long long feasible = 0;
};

Best scan(const RatInstance& inst, long long begin, long long end) {
  Best b;
  if (begin >= end) return b;
  Evaluator eval(inst);
  Assignment a(static_cast<std::size_t>(inst.I));
  set_digits(a, begin, inst.K);
  for (long long idx = begin; idx < end; ++idx, next_digits(a, inst.K)) {
    const double v = eval(a);
    if (std::isnan(v)) continue;
    ++b.feasible;
    if (v > b.value) {
      b.value = v;
      b.index = idx;
    }
  }
  return b;
}

OracleResult finish(const RatInstance& inst, const Best& b) {
  if (b.index < 0) throw InfeasibleInputError("exhaustive_oracle: no assignment satisfies C1, C2 and C4");
  OracleResult r;
  r.best.assign(static_cast<std::size_t>(inst.I), 0);
  set_digits(r.best, b.index, inst.K);
  r.value = b.value;
  r.feasible_count = b.feasible;
  return r;
}

}  // namespace

OracleResult exhaustive_oracle_serial(const RatInstance& inst) {
  return finish(inst, scan(inst, 0, total_count(inst)));
}

OracleResult exhaustive_oracle(const RatInstance& inst, int threads) {
  const long long total = total_count(inst);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  std::vector<Best> part(static_cast<std::size_t>(nt));
#pragma omp parallel num_threads(nt)
  {
    const int t = omp_get_thread_num();
    const int used = omp_get_num_threads();
    const long long begin = total * t / used;
    const long long end = total * (t + 1) / used;
    part[static_cast<std::size_t>(t)] = scan(inst, begin, end);
  }
  // Ranges are in index order, so a strict comparison keeps the first maximizer.
  Best best;
  for (const Best& b : part) {
    best.feasible += b.feasible;
    if (b.index >= 0 && b.value > best.value) {
      best.value = b.value;
      best.index = b.index;
    }
  }
  return finish(inst, best);
}

RelativeError relative_error(double f_star, double f_alg) {
  if (f_alg == 0.0) throw std::invalid_argument("relative_error: f_alg is 0, chi = 1 - f_star/f_alg is undefined");
  if (f_star == 0.0) throw std::invalid_argument("relative_error: f_star is 0, chi_gap is undefined");
  return {1.0 - f_star / f_alg, 1.0 - f_alg / f_star};
}

}  // namespace mipreg::rat
