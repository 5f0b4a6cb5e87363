// Command-line front end for the assignment experiments.
//
// Exit codes: 0 success, 1 usage or malformed input, 2 solver failure,
// 3 infeasible input.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mipreg/experiments.hpp"

using namespace mipreg;
namespace ex = mipreg::experiments;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::string> algorithm;
  std::optional<std::string> instance;
  std::vector<int> I;
  std::optional<int> K;
  std::optional<int> seeds;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "base seed (overrides config)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--threads", f.threads, "worker threads, default machine parallelism");
  cmd->add_option("--algorithm", f.algorithm, "alg1 (multiconvex) or alg2 (DC)")
      ->check(CLI::IsMember({"alg1", "alg2", "alg1-multiconvex", "alg2-dc"}));
  cmd->add_option("--instance", f.instance, "instance JSON file (solve-one, oracle)");
  cmd->add_option("--I", f.I, "user counts");
  cmd->add_option("--K", f.K, "station count");
  cmd->add_option("--seeds", f.seeds, "number of seeds");
}

ex::ExperimentConfig build_config(const std::string& kind, const Flags& f) {
  ex::ExperimentConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = ex::config_from_json(ss.str());
  }
  cfg.kind = kind;
  if (f.seed) cfg.base_seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  if (f.threads) cfg.threads = *f.threads;
  if (f.algorithm) cfg.algorithm = ex::algorithm_from_string(*f.algorithm);
  if (f.instance) cfg.instance = *f.instance;
  if (!f.I.empty()) cfg.I = f.I;
  if (f.K) cfg.K = *f.K;
  if (f.seeds) cfg.seeds = *f.seeds;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalty-method solvers for user-to-station assignment: experiments and tools"};
  app.set_version_flag("--version", std::string(ex::version()));
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen", "generate instance files"},
      {"solve-one", "solve one instance and validate the assignment"},
      {"oracle", "exhaustive search for the optimal assignment"},
      {"cdf", "relative error against the oracle over a seed batch"},
      {"lambda-sweep", "solve at fixed lambda values"},
      {"convergence", "per-iteration traces against the iteration bound"}};
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  const std::string kind = app.get_subcommands().front()->get_name();

  try {
    const auto cfg = build_config(kind, flags);
    const auto out = ex::run(cfg);
    ex::write_outputs(cfg, out);
    std::cout << out.report;
    std::cout << "outputs: " << cfg.out << " (config hash " << ex::config_hash(cfg) << ")\n";
    if (out.solver_failures > 0) {
      std::cerr << out.solver_failures << " solver failure(s); see manifest.txt\n";
      return 2;
    }
    if (out.infeasible_inputs > 0) {
      std::cerr << out.infeasible_inputs << " infeasible instance(s); see manifest.txt\n";
      return 3;
    }
    return 0;
  } catch (const InfeasibleInputError& e) {
    std::cerr << "infeasible input: " << e.what() << "\n";
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what();
    try {
      std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
      std::cerr << " <- " << inner.what();
    }
    std::cerr << "\n";
    return 2;
  }
}
