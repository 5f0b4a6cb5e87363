#include <doctest.h>

#include <cmath>

#include "brute_force.hpp"
#include "mipreg/rat/model.hpp"
#include "mipreg/rat/oracle.hpp"
#include "sampling.hpp"

using namespace mipreg;
using namespace mipreg::rat;

namespace {

RatInstance uniform_rates(int I, double r) {
  RatInstance inst;
  inst.I = I;
  inst.K = 2;
  inst.rat_of = {1, 2};
  inst.rate = Eigen::MatrixXd::Constant(I, 2, r);
  inst.alpha = Vec::Ones(I);
  inst.n_max = {std::max(I - 1, 1), std::max(I - 1, 1)};
  inst.w_max = {r, r};
  inst.k_max = {I, I};
  return inst;
}

Assignment solve_alg1(const RatInstance& inst) {
  const auto trace = solve(build_multiconvex(inst), PenaltySchedule(1.0, 2.0));
  return decode(inst, trace.x);
}

Assignment solve_alg2(const RatInstance& inst) {
  const auto res = dc_solve(build_dc(inst), PenaltySchedule(1.0, 2.0), encode(inst, *round_robin_assignment(inst)));
  return decode(inst, res.x);
}

}  // namespace

TEST_CASE("oracle: a single user takes the faster station") {
  auto inst = uniform_rates(1, 1.0);
  inst.rate << 3.0, 7.0;
  inst.w_max = {3.0, 7.0};
  const auto r = exhaustive_oracle(inst);
  CHECK(r.best == Assignment{1});
  CHECK(r.value == 7.0);
  CHECK(r.feasible_count == 2);
}

TEST_CASE("oracle: symmetric ties go to the first assignment in order") {
  const auto r = exhaustive_oracle(uniform_rates(2, 4.0));
  // (0,0) and (1,1) exceed N_max = 1; (0,1) and (1,0) tie at 8.
  CHECK(r.best == Assignment{0, 1});
  CHECK(r.value == 8.0);
  CHECK(r.feasible_count == 2);
  CHECK(exhaustive_oracle_serial(uniform_rates(2, 4.0)).best == Assignment{0, 1});
}

TEST_CASE("oracle: parallel and serial scans agree exactly") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_instance({}, 7, 3, seed);
    const auto s = exhaustive_oracle_serial(inst);
    for (int threads : {1, 2, 3, 8}) {
      const auto p = exhaustive_oracle(inst, threads);
      CHECK(p.best == s.best);
      CHECK(p.value == s.value);
      CHECK(p.feasible_count == s.feasible_count);
    }
  }
}

TEST_CASE("property: oracle agrees with the recursive enumerator under random caps") {
  testgen::Gen gen(9);
  for (int trial = 0; trial < 40; ++trial) {
    const int I = gen.integer(1, 6), K = gen.integer(2, 3);
    auto inst = generate_instance({}, I, K, 500 + trial);
    if (trial % 2 == 1) {
      inst.n_max = {gen.integer(1, I), gen.integer(1, I)};
      for (int& c : inst.k_max) c = gen.integer(1, I);
      inst.w_max[0] *= gen.uniform(0.5, 1.0);
      inst.w_max[1] *= gen.uniform(0.5, 1.0);
    }
    const auto b = brute::enumerate(inst);
    if (b.best.empty()) {
      CHECK_THROWS_AS(exhaustive_oracle(inst), InfeasibleInputError);
      continue;
    }
    const auto r = exhaustive_oracle(inst);
    CHECK(std::abs(r.value - b.value) <= 1e-12 * b.value);
    CHECK(check_constraints(inst, r.best).feasible);
    CHECK(aggregate_throughput(inst, r.best) == r.value);
  }
}

TEST_CASE("oracle refuses instances beyond the size guard") {
  const auto inst = generate_instance({}, 24, 2, 1);
  CHECK_THROWS_WITH_AS(exhaustive_oracle(inst), doctest::Contains("sampling"), OracleSizeError);
}

TEST_CASE("relative_error examples") {
  const auto same = relative_error(5.0, 5.0);
  CHECK(same.chi == 0.0);
  CHECK(same.chi_gap == 0.0);
  const auto e = relative_error(10.0, 8.0);
  CHECK(e.chi == doctest::Approx(-0.25));
  CHECK(e.chi_gap == doctest::Approx(0.2));
  CHECK_THROWS_AS(relative_error(10.0, 0.0), std::invalid_argument);
}

TEST_CASE("alg1 and alg2 land within 0.15 of the optimum on I = 4") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_instance({}, 4, 2, seed);
    const double best = exhaustive_oracle(inst).value;
    for (const auto& a : {solve_alg1(inst), solve_alg2(inst)}) {
      CHECK(check_constraints(inst, a).feasible);
      CHECK(relative_error(best, aggregate_throughput(inst, a)).chi_gap <= 0.15);
    }
  }
}

TEST_CASE("property: oracle dominates alg1 on I = 6") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = generate_instance({}, 6, 2, 1000 + seed);
    const double best = exhaustive_oracle(inst).value;
    const auto a = solve_alg1(inst);
    REQUIRE(check_constraints(inst, a).feasible);
    CHECK(aggregate_throughput(inst, a) <= best + 1e-9);
  }
}

TEST_CASE("RAT: per-block and merged continuous updates agree") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_instance({}, 6, 2, seed);
    const auto p = build_multiconvex(inst);
    const auto merged = solve(p, PenaltySchedule(1.0, 2.0));
    const auto blocks = solve_multiblock(p, PenaltySchedule(1.0, 2.0));
    CHECK(std::abs(blocks.final_f - merged.final_f) <= 1e-4 * std::abs(merged.final_f));
  }
}

TEST_CASE("property: alg1 traces never increase across y, x and a steps") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto trace = solve(build_multiconvex(generate_instance({}, 8, 2, seed)), PenaltySchedule(1.0, 2.0));
    for (const auto& r : trace.records) {
      CHECK(r.value_after_y <= r.value_start + 1e-8);
      CHECK(r.value_after_x <= r.value_after_y + 1e-8);
      CHECK(r.value_after_a <= r.value_after_x + 1e-8);
    }
  }
}
