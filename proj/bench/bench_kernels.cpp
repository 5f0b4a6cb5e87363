// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "mipreg/experiments.hpp"
#include "mipreg/experiments_impl.hpp"
#include "mipreg/rat/model.hpp"
#include "mipreg/rat/oracle.hpp"

using namespace mipreg;

namespace {

void BM_OracleSerial(benchmark::State& state) {
  const auto inst = rat::generate_instance({}, static_cast<int>(state.range(0)), 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(rat::exhaustive_oracle_serial(inst).value);
  state.SetItemsProcessed(state.iterations() * (int64_t{1} << state.range(0)));
}

void BM_OracleParallel(benchmark::State& state) {
  const auto inst = rat::generate_instance({}, static_cast<int>(state.range(0)), 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(rat::exhaustive_oracle(inst).value);
  state.SetItemsProcessed(state.iterations() * (int64_t{1} << state.range(0)));
}

// One multiconvex solve per seed, the unit of work in a Monte Carlo batch.
double solve_seed(int j) {
  const auto inst = rat::generate_instance({}, 8, 2, static_cast<std::uint64_t>(j));
  const auto trace = solve(rat::build_multiconvex(inst), PenaltySchedule(1.0, 2.0));
  return trace.final_f;
}

void BM_BatchSerial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(experiments::map_jobs_serial<double>(n, solve_seed));
}

void BM_BatchParallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(experiments::map_jobs<double>(n, 0, solve_seed));
}

}  // namespace

BENCHMARK(BM_OracleSerial)->Arg(12)->Arg(16)->Arg(18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleParallel)->Arg(12)->Arg(16)->Arg(18)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BatchSerial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
