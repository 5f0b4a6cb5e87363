#pragma once

// Batch experiments on generated assignment instances: CSV tables plus a
// manifest. Output bytes depend only on the configuration, never on the
// thread count.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mipreg/rat/instance.hpp"

namespace mipreg::experiments {

enum class Algorithm { alg1, alg2 };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);  // "alg1", "alg2" or the long names

struct Setting {
  double rho = 2.0;
  double epsilon = 1e-2;
  double lambda0 = 1.0;
};

struct ExperimentConfig {
  std::string kind = "solve-one";  // cdf | lambda-sweep | convergence | solve-one | oracle | gen
  std::vector<int> I = {5};
  int K = 2;
  int seeds = 1;
  std::uint64_t base_seed = 0;
  rat::ChannelConfig channel;

  double lambda0 = 1.0;
  double rho = 2.0;
  double epsilon = 1e-3;
  double stop_tol = 1e-6;
  int max_outer = 200;
  double subsolver_tol = 1e-8;
  Algorithm algorithm = Algorithm::alg1;

  /// Explicit lambda grid in solver units; empty means grid_points values
  /// spaced logarithmically from 1e-2 to 10 L for each instance.
  std::vector<double> lambda_grid;
  int grid_points = 25;
  /// Convergence settings; empty means {1.5, 2, 4} x {1e-1, 1e-2}, lambda0 = 1.
  std::vector<Setting> settings;

  std::string out = "out";
  int threads = 0;  // <= 0: machine parallelism
  std::optional<std::string> instance;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Parses the JSON config; unknown keys and wrong types raise FormatError.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
/// FNV-1a (64 bit) of the canonical JSON without `out` and `threads`.
std::string config_hash(const ExperimentConfig& cfg);

struct Table {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const;
};

struct RunOutput {
  std::vector<Table> tables;
  /// Extra manifest lines (per-seed status, Lipschitz constants, ...).
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, double>> phases;  // wall-clock seconds
  int solver_failures = 0;
  int infeasible_inputs = 0;
  /// Human-readable summary for the terminal.
  std::string report;
};

RunOutput run_cdf(const ExperimentConfig& cfg);
RunOutput run_lambda_sweep(const ExperimentConfig& cfg);
RunOutput run_convergence(const ExperimentConfig& cfg);
RunOutput run_solve_one(const ExperimentConfig& cfg);
RunOutput run_oracle(const ExperimentConfig& cfg);
/// Writes one instance JSON per (I, seed) into cfg.out.
RunOutput run_gen(const ExperimentConfig& cfg);
RunOutput run(const ExperimentConfig& cfg);

/// Writes <out>/<table>.csv for each table and <out>/manifest.txt.
void write_outputs(const ExperimentConfig& cfg, const RunOutput& out);

/// Fixed 12-significant-digit formatting used in every CSV.
std::string num(double v);

/// Runs f(0..n-1) across threads and returns results in index order. The
/// serial variant is the reference it is tested against.
template <class R, class F>
std::vector<R> map_jobs(int n, int threads, F f);
template <class R, class F>
std::vector<R> map_jobs_serial(int n, F f) {
  std::vector<R> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) out.push_back(f(j));
  return out;
}

/// Library version string.
const char* version();

}  // namespace mipreg::experiments

#include "mipreg/experiments_impl.hpp"
