#include "mipreg/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "mipreg/rat/io.hpp"
#include "mipreg/rat/model.hpp"
#include "mipreg/rat/oracle.hpp"

#ifndef MIPREG_VERSION
#define MIPREG_VERSION "dev"
#endif

namespace mipreg::experiments {

using nlohmann::json;
using rat::Assignment;
using rat::RatInstance;

const char* version() { return MIPREG_VERSION; }

std::string to_string(Algorithm a) { return a == Algorithm::alg1 ? "alg1" : "alg2"; }

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "alg1" || s == "alg1-multiconvex") return Algorithm::alg1;
  if (s == "alg2" || s == "alg2-dc") return Algorithm::alg2;
  throw std::invalid_argument(fmt::format("unknown algorithm '{}' (expected alg1 or alg2)", s));
}

std::string num(double v) {
  if (std::isnan(v)) return "";
  return fmt::format("{:.12g}", v);
}

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
  static const std::set<std::string> kinds = {"cdf", "lambda-sweep", "convergence", "solve-one", "oracle", "gen"};
  if (!kinds.count(kind)) throw std::invalid_argument(fmt::format("kind: unknown experiment '{}'", kind));
  if (I.empty()) throw std::invalid_argument("I: list must not be empty");
  for (int i : I)
    if (i < 1) throw std::invalid_argument("I: user counts must be positive");
  if (K < 2) throw std::invalid_argument("K: need at least 2 stations");
  if (seeds < 1) throw std::invalid_argument("seeds: count must be at least 1");
  if (!(lambda0 > 0.0)) throw std::invalid_argument("solver.lambda0: must be positive");
  if (!(rho > 1.0)) throw std::invalid_argument("solver.rho: must exceed 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("solver.epsilon: must be positive");
  if (!(stop_tol > 0.0)) throw std::invalid_argument("solver.stop_tol: must be positive");
  if (max_outer < 1) throw std::invalid_argument("solver.max_outer: must be positive");
  if (!(subsolver_tol > 0.0)) throw std::invalid_argument("solver.subsolver_tol: must be positive");
  for (std::size_t j = 0; j < lambda_grid.size(); ++j) {
    if (!(lambda_grid[j] > 0.0)) throw std::invalid_argument("lambda_grid: values must be positive");
    if (j > 0 && !(lambda_grid[j] > lambda_grid[j - 1])) {
      throw std::invalid_argument("lambda_grid: values must be ascending");
    }
  }
  if (grid_points < 1) throw std::invalid_argument("grid_points: must be positive");
  for (const auto& s : settings) {
    if (!(s.rho > 1.0) || !(s.epsilon > 0.0) || !(s.lambda0 > 0.0)) {
      throw std::invalid_argument("settings: need rho > 1, epsilon > 0, lambda0 > 0");
    }
  }
  channel.validate();
}

namespace {

json channel_to_json(const rat::ChannelConfig& c) {
  return {{"radius", c.radius},
          {"pathloss_exponent", c.pathloss_exponent},
          {"bandwidth", c.bandwidth},
          {"noise_dbm_per_hz", c.noise_dbm_per_hz},
          {"power_dbm", c.power_dbm},
          {"min_distance", c.min_distance},
          {"rayleigh_sigma", c.rayleigh_sigma}};
}

json to_json_obj(const ExperimentConfig& c, bool for_hash) {
  json j;
  j["kind"] = c.kind;
  j["I"] = c.I;
  j["K"] = c.K;
  j["seeds"] = c.seeds;
  j["base_seed"] = c.base_seed;
  j["channel"] = channel_to_json(c.channel);
  j["solver"] = {{"lambda0", c.lambda0},     {"rho", c.rho},
                 {"epsilon", c.epsilon},     {"stop_tol", c.stop_tol},
                 {"max_outer", c.max_outer}, {"subsolver_tol", c.subsolver_tol}};
  j["algorithm"] = to_string(c.algorithm);
  j["lambda_grid"] = c.lambda_grid;
  j["grid_points"] = c.grid_points;
  json st = json::array();
  for (const auto& s : c.settings) st.push_back({{"rho", s.rho}, {"epsilon", s.epsilon}, {"lambda0", s.lambda0}});
  j["settings"] = st;
  if (c.instance) j["instance"] = *c.instance;
  if (!for_hash) {
    j["out"] = c.out;
    j["threads"] = c.threads;
  }
  return j;
}

template <class T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("config: field '{}{}' has the wrong type ({})", where, key, e.what()));
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!known.count(k)) throw FormatError(fmt::format("config: unknown field '{}{}'", where, k));
  }
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = text.substr(0, std::min(text.size(), e.byte));
    const long line = 1 + std::count(upto.begin(), upto.end(), '\n');
    throw FormatError(fmt::format("config: syntax error on line {}: {}", line, e.what()));
  }
  if (!j.is_object()) throw FormatError("config: top level must be an object");
  reject_unknown(j, {"kind", "I", "K", "seeds", "base_seed", "channel", "solver", "algorithm", "lambda_grid",
                     "grid_points", "settings", "out", "threads", "instance"},
                 "");
  ExperimentConfig c;
  read(j, "kind", c.kind, "");
  if (j.contains("I") && j["I"].is_number_integer()) {
    c.I = {j["I"].get<int>()};
  } else {
    read(j, "I", c.I, "");
  }
  read(j, "K", c.K, "");
  read(j, "seeds", c.seeds, "");
  read(j, "base_seed", c.base_seed, "");
  if (j.contains("channel")) {
    const json& ch = j["channel"];
    reject_unknown(ch, {"radius", "pathloss_exponent", "bandwidth", "noise_dbm_per_hz", "power_dbm", "min_distance",
                        "rayleigh_sigma"},
                   "channel.");
    read(ch, "radius", c.channel.radius, "channel.");
    read(ch, "pathloss_exponent", c.channel.pathloss_exponent, "channel.");
    read(ch, "bandwidth", c.channel.bandwidth, "channel.");
    read(ch, "noise_dbm_per_hz", c.channel.noise_dbm_per_hz, "channel.");
    read(ch, "power_dbm", c.channel.power_dbm, "channel.");
    read(ch, "min_distance", c.channel.min_distance, "channel.");
    read(ch, "rayleigh_sigma", c.channel.rayleigh_sigma, "channel.");
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    reject_unknown(s, {"lambda0", "rho", "epsilon", "stop_tol", "max_outer", "subsolver_tol"}, "solver.");
    read(s, "lambda0", c.lambda0, "solver.");
    read(s, "rho", c.rho, "solver.");
    read(s, "epsilon", c.epsilon, "solver.");
    read(s, "stop_tol", c.stop_tol, "solver.");
    read(s, "max_outer", c.max_outer, "solver.");
    read(s, "subsolver_tol", c.subsolver_tol, "solver.");
  }
  if (j.contains("algorithm")) {
    std::string a;
    read(j, "algorithm", a, "");
    try {
      c.algorithm = algorithm_from_string(a);
    } catch (const std::invalid_argument& e) {
      throw FormatError(fmt::format("config: field 'algorithm': {}", e.what()));
    }
  }
  read(j, "lambda_grid", c.lambda_grid, "");
  read(j, "grid_points", c.grid_points, "");
  if (j.contains("settings")) {
    if (!j["settings"].is_array()) throw FormatError("config: field 'settings' must be an array");
    for (const json& s : j["settings"]) {
      reject_unknown(s, {"rho", "epsilon", "lambda0"}, "settings[].");
      Setting st;
      read(s, "rho", st.rho, "settings[].");
      read(s, "epsilon", st.epsilon, "settings[].");
      read(s, "lambda0", st.lambda0, "settings[].");
      c.settings.push_back(st);
    }
  }
  read(j, "out", c.out, "");
  read(j, "threads", c.threads, "");
  if (j.contains("instance")) {
    std::string p;
    read(j, "instance", p, "");
    c.instance = p;
  }
  return c;
}

std::string config_to_json(const ExperimentConfig& cfg) { return to_json_obj(cfg, false).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string s = to_json_obj(cfg, true).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string Table::csv() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) out += ',';
      out += cells[j];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

// ---------------------------------------------------------------- solving

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Job {
  int I = 0;
  std::uint64_t seed = 0;
};

std::vector<Job> jobs_of(const ExperimentConfig& cfg) {
  std::vector<Job> jobs;
  for (int I : cfg.I)
    for (int s = 0; s < cfg.seeds; ++s) jobs.push_back({I, cfg.base_seed + static_cast<std::uint64_t>(s)});
  return jobs;
}

SolveOptions solve_options(const ExperimentConfig& cfg, double epsilon) {
  SolveOptions o;
  o.epsilon = epsilon;
  o.stop_tol = cfg.stop_tol;
  o.max_outer = cfg.max_outer;
  o.subsolver.tol = cfg.subsolver_tol;
  return o;
}

struct Outcome {
  Vec x;
  Assignment assignment;
  double f_alg = 0.0;    // aggregate of the decoded assignment, bits/s
  double relaxed = 0.0;  // relaxed throughput of x, bits/s
  double distance = 0.0;
  double omega = 0.0;    // final penalized value, solver units
  rat::ConstraintReport check;
  SolveTrace trace;      // alg2: last accepted inner solve
  int outer = 0;
};

Vec dc_start(const RatInstance& inst, const DCProblem& p) {
  if (const auto rr = rat::round_robin_assignment(inst)) {
    const Vec x = rat::encode(inst, *rr);
    if (p.region.contains(x, 1e-9)) return x;
  }
  return project(Vec::Constant(p.n, 1.0 / inst.K), p.region, 1e-10);
}

Outcome solve_instance(const RatInstance& inst, Algorithm alg, const PenaltySchedule& schedule,
                       const SolveOptions& opt) {
  Outcome o;
  if (alg == Algorithm::alg1) {
    const auto p = rat::build_multiconvex(inst);
    o.trace = solve(p, schedule, opt);
    o.x = o.trace.x;
    o.omega = o.trace.final_value;
    o.outer = 1;
  } else {
    const auto p = rat::build_dc(inst);
    DCOptions dopt;
    dopt.inner = opt;
    const auto r = dc_solve(p, schedule, dc_start(inst, p), dopt);
    o.trace = r.inner;
    o.x = r.x;
    o.omega = r.final_value;
    o.outer = static_cast<int>(r.outer.size());
  }
  o.assignment = rat::decode(inst, o.x);
  o.check = rat::check_constraints(inst, o.assignment);
  o.f_alg = rat::aggregate_throughput(inst, o.assignment);
  o.relaxed = rat::relaxed_throughput(inst, o.x);
  o.distance = kernel::distance(o.x);
  return o;
}

// Uniform error capture for one (I, seed) job.
struct Status {
  std::string code = "ok";
  std::string message;
};

template <class F>
Status guarded(F&& f) {
  try {
    f();
    return {};
  } catch (const rat::OracleSizeError& e) {
    return {"oracle_too_large", e.what()};
  } catch (const InfeasibleInputError& e) {
    return {"infeasible_input", e.what()};
  } catch (const std::exception& e) {
    std::string msg = e.what();
    try {
      std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
      msg += std::string(" <- ") + inner.what();
    }
    return {"solver_failure", msg};
  }
}

void tally(RunOutput& out, const Job& j, const Status& s) {
  out.notes.push_back(fmt::format("seed I={} seed={}: {}{}{}", j.I, j.seed, s.code, s.message.empty() ? "" : " ",
                                  s.message));
  if (s.code == "solver_failure" || s.code == "infeasible_solution") ++out.solver_failures;
  if (s.code == "infeasible_input") ++out.infeasible_inputs;
}

std::vector<double> default_grid(double L, int points) {
  std::vector<double> g;
  const double lo = 1e-2, hi = 10.0 * L;
  for (int j = 0; j < points; ++j) {
    g.push_back(points == 1 ? hi : lo * std::pow(hi / lo, static_cast<double>(j) / (points - 1)));
  }
  return g;
}

std::vector<Setting> settings_of(const ExperimentConfig& cfg) {
  if (!cfg.settings.empty()) return cfg.settings;
  std::vector<Setting> s;
  for (double rho : {1.5, 2.0, 4.0})
    for (double eps : {1e-1, 1e-2}) s.push_back({rho, eps, 1.0});
  return s;
}

double solver_lipschitz(const RatInstance& inst) { return rat::lipschitz_constant(inst) * rat::FormulationOptions{}.rate_scale; }

std::string join_assignment(const Assignment& a) {
  std::string s;
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "-" : "") + std::to_string(a[i]);
  return s;
}

}  // namespace

// ---------------------------------------------------------------- runs

RunOutput run_cdf(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const auto jobs = jobs_of(cfg);
  struct Row {
    double f_alg = NAN, f_star = NAN, chi = NAN, chi_gap = NAN;
    Status status;
  };
  const auto rows = map_jobs<Row>(static_cast<int>(jobs.size()), cfg.threads, [&](int k) {
    const Job& j = jobs[static_cast<std::size_t>(k)];
    Row r;
    r.status = guarded([&] {
      const auto inst = rat::generate_instance(cfg.channel, j.I, cfg.K, j.seed);
      inst.validate();
      const auto o = solve_instance(inst, cfg.algorithm, PenaltySchedule(cfg.lambda0, cfg.rho),
                                    solve_options(cfg, cfg.epsilon));
      if (!o.check.feasible) throw SolverError("decoded assignment infeasible: " + o.check.violations.front());
      r.f_alg = o.f_alg;
      const auto best = rat::exhaustive_oracle(inst, 1);
      r.f_star = best.value;
      const auto e = rat::relative_error(r.f_star, r.f_alg);
      r.chi = e.chi;
      r.chi_gap = e.chi_gap;
    });
    return r;
  });

  RunOutput out;
  out.phases.emplace_back("batch", seconds_since(t0));
  Table t{"cdf", {"seed", "I", "f_alg", "f_star", "chi", "chi_gap", "status"}, {}};
  std::map<int, std::vector<double>> gaps;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto& j = jobs[k];
    const auto& r = rows[k];
    t.rows.push_back({std::to_string(j.seed), std::to_string(j.I), num(r.f_alg), num(r.f_star), num(r.chi),
                      num(r.chi_gap), r.status.code});
    tally(out, j, r.status);
    if (r.status.code == "ok") gaps[j.I].push_back(r.chi_gap);
  }
  Table cdf{"cdf_table", {"I", "chi_gap", "cdf", "count"}, {}};
  for (int I : cfg.I) {
    const auto& g = gaps[I];
    for (int q = 0; q < 100; ++q) {
      const double x = q / 100.0;
      const auto below = std::count_if(g.begin(), g.end(), [x](double v) { return v <= x; });
      cdf.rows.push_back({std::to_string(I), num(x), g.empty() ? "" : num(static_cast<double>(below) / g.size()),
                          std::to_string(g.size())});
    }
    const auto within = std::count_if(g.begin(), g.end(), [](double v) { return v <= 0.15; });
    out.report += fmt::format("I={}: {} of {} solved seeds within chi_gap 0.15\n", I, within, g.size());
  }
  out.tables = {t, cdf};
  return out;
}

RunOutput run_lambda_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const auto jobs = jobs_of(cfg);
  struct Row {
    std::vector<std::vector<std::string>> rows;
    double L = NAN;
    Status status;
  };
  const auto res = map_jobs<Row>(static_cast<int>(jobs.size()), cfg.threads, [&](int k) {
    const Job& j = jobs[static_cast<std::size_t>(k)];
    Row r;
    r.status = guarded([&] {
      const auto inst = rat::generate_instance(cfg.channel, j.I, cfg.K, j.seed);
      inst.validate();
      r.L = solver_lipschitz(inst);
      const auto grid = cfg.lambda_grid.empty() ? default_grid(r.L, cfg.grid_points) : cfg.lambda_grid;
      for (double lambda : grid) {
        const auto o = solve_instance(inst, cfg.algorithm, PenaltySchedule::constant(lambda),
                                      solve_options(cfg, cfg.epsilon));
        r.rows.push_back({std::to_string(j.seed), std::to_string(j.I), num(lambda), num(r.L), num(o.relaxed),
                          num(o.distance), o.distance <= 1e-6 ? "1" : "0", num(o.omega),
                          o.check.feasible ? "1" : "0"});
      }
    });
    return r;
  });
  RunOutput out;
  out.phases.emplace_back("batch", seconds_since(t0));
  Table t{"lambda_sweep",
          {"seed", "I", "lambda", "lipschitz", "f_alg", "distance", "binary", "omega", "feasible"},
          {}};
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    for (const auto& row : res[k].rows) t.rows.push_back(row);
    tally(out, jobs[k], res[k].status);
    out.notes.push_back(fmt::format("lipschitz I={} seed={}: {} (solver units, Mbit/s)", jobs[k].I, jobs[k].seed,
                                    num(res[k].L)));
  }
  out.tables = {t};
  out.report = fmt::format("{} rows over {} instances\n", t.rows.size(), jobs.size());
  return out;
}

RunOutput run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const auto jobs = jobs_of(cfg);
  const auto settings = settings_of(cfg);
  struct Row {
    std::vector<std::vector<std::string>> trace, summary;
    Status status;
  };
  const auto res = map_jobs<Row>(static_cast<int>(jobs.size()), cfg.threads, [&](int k) {
    const Job& j = jobs[static_cast<std::size_t>(k)];
    Row r;
    r.status = guarded([&] {
      const auto inst = rat::generate_instance(cfg.channel, j.I, cfg.K, j.seed);
      inst.validate();
      const double L = solver_lipschitz(inst);
      const Index n = static_cast<Index>(inst.I) * inst.K;
      for (const auto& s : settings) {
        const int bound = iteration_bound(L, n, s.epsilon, s.lambda0, s.rho);
        const auto head = std::vector<std::string>{std::to_string(j.seed), std::to_string(j.I), num(s.rho),
                                                   num(s.epsilon), num(s.lambda0)};
        Status st = guarded([&] {
          const auto o = solve_instance(inst, cfg.algorithm, PenaltySchedule(s.lambda0, s.rho),
                                        solve_options(cfg, s.epsilon));
          for (const auto& rec : o.trace.records) {
            auto row = head;
            for (double v : {rec.lambda, rec.value_start, rec.value_after_y, rec.value_after_x, rec.value_after_a,
                             rec.distance})
              row.push_back(num(v));
            row.insert(row.begin() + 5, std::to_string(rec.t));
            row.push_back(std::to_string(bound));
            r.trace.push_back(std::move(row));
          }
          auto row = head;
          row.push_back(num(L));
          row.push_back(std::to_string(bound));
          row.push_back(o.trace.first_binary ? std::to_string(*o.trace.first_binary) : "");
          row.push_back(std::to_string(o.trace.iterations));
          row.push_back(o.trace.converged ? "1" : "0");
          row.push_back(num(o.f_alg));
          row.push_back("ok");
          r.summary.push_back(std::move(row));
        });
        if (st.code != "ok") {
          auto row = head;
          row.insert(row.end(), {num(L), std::to_string(bound), "", "", "0", "", st.code});
          r.summary.push_back(std::move(row));
          r.status = st;
        }
      }
    });
    return r;
  });
  RunOutput out;
  out.phases.emplace_back("batch", seconds_since(t0));
  Table trace{"convergence",
              {"seed", "I", "rho", "epsilon", "lambda0", "t", "lambda", "value_start", "value_after_y",
               "value_after_x", "value_after_a", "distance", "bound"},
              {}};
  Table summary{"convergence_summary",
                {"seed", "I", "rho", "epsilon", "lambda0", "lipschitz", "bound", "first_binary", "iterations",
                 "converged", "f_alg", "status"},
                {}};
  int within = 0, total = 0;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    for (const auto& row : res[k].trace) trace.rows.push_back(row);
    for (const auto& row : res[k].summary) {
      summary.rows.push_back(row);
      ++total;
      if (!row[7].empty() && std::stoi(row[7]) <= std::stoi(row[6])) ++within;
    }
    tally(out, jobs[k], res[k].status);
  }
  out.tables = {trace, summary};
  out.report = fmt::format("{} of {} runs reached d(x) <= epsilon within the iteration bound\n", within, total);
  return out;
}

namespace {

RatInstance instance_for(const ExperimentConfig& cfg) {
  if (cfg.instance) return rat::load_instance(*cfg.instance);
  auto inst = rat::generate_instance(cfg.channel, cfg.I.front(), cfg.K, cfg.base_seed);
  inst.validate();
  return inst;
}

}  // namespace

RunOutput run_solve_one(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const RatInstance inst = instance_for(cfg);
  RunOutput out;
  out.phases.emplace_back("load", seconds_since(t0));
  const auto t1 = Clock::now();
  const auto o = solve_instance(inst, cfg.algorithm, PenaltySchedule(cfg.lambda0, cfg.rho),
                                solve_options(cfg, cfg.epsilon));
  out.phases.emplace_back("solve", seconds_since(t1));

  const auto tp = rat::throughput(inst, o.assignment);
  Table sol{"solution", {"user", "station", "rat", "throughput"}, {}};
  for (int i = 0; i < inst.I; ++i) {
    const int k = o.assignment[static_cast<std::size_t>(i)];
    sol.rows.push_back({std::to_string(i), std::to_string(k), std::to_string(inst.rat_of[static_cast<std::size_t>(k)]),
                        num(tp.per_user[i])});
  }
  Table tr{"trace",
           {"t", "lambda", "value_start", "value_after_y", "value_after_x", "value_after_a", "distance", "f"},
           {}};
  for (const auto& r : o.trace.records) {
    tr.rows.push_back({std::to_string(r.t), num(r.lambda), num(r.value_start), num(r.value_after_y),
                       num(r.value_after_x), num(r.value_after_a), num(r.distance), num(r.f)});
  }
  out.tables = {sol, tr};
  out.report = fmt::format("algorithm: {}\nusers: {}  stations: {}\nassignment: {}\n", to_string(cfg.algorithm),
                           inst.I, inst.K, join_assignment(o.assignment));
  out.report += fmt::format("aggregate throughput: {} bit/s\n", num(tp.aggregate));
  if (o.check.feasible) {
    out.report += "validation: feasible (C1-C5 hold)\n";
  } else {
    out.report += "validation: INFEASIBLE\n";
    for (const auto& v : o.check.violations) out.report += "  " + v + "\n";
    ++out.solver_failures;
  }
  out.notes.push_back(fmt::format("solve-one: {} aggregate={} feasible={}", join_assignment(o.assignment),
                                  num(tp.aggregate), o.check.feasible ? 1 : 0));
  return out;
}

RunOutput run_oracle(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  RunOutput out;
  Table t{"oracle", {"seed", "I", "f_star", "assignment", "feasible_count", "status"}, {}};
  if (cfg.instance) {
    const auto inst = rat::load_instance(*cfg.instance);
    const auto r = rat::exhaustive_oracle(inst, cfg.threads);
    t.rows.push_back({inst.seed ? std::to_string(*inst.seed) : "", std::to_string(inst.I), num(r.value),
                      join_assignment(r.best), std::to_string(r.feasible_count), "ok"});
  } else {
    // Each oracle is itself parallel, so instances run one after another.
    for (const auto& j : jobs_of(cfg)) {
      rat::OracleResult r;
      const Status st = guarded([&] {
        const auto inst = rat::generate_instance(cfg.channel, j.I, cfg.K, j.seed);
        inst.validate();
        r = rat::exhaustive_oracle(inst, cfg.threads);
      });
      t.rows.push_back({std::to_string(j.seed), std::to_string(j.I), st.code == "ok" ? num(r.value) : "",
                        join_assignment(r.best), std::to_string(r.feasible_count), st.code});
      tally(out, j, st);
    }
  }
  out.phases.emplace_back("oracle", seconds_since(t0));
  out.tables = {t};
  out.report = fmt::format("{} oracle rows\n", t.rows.size());
  return out;
}

RunOutput run_gen(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  RunOutput out;
  Table t{"instances", {"seed", "I", "K", "file"}, {}};
  std::filesystem::create_directories(cfg.out);
  for (const auto& j : jobs_of(cfg)) {
    const auto inst = rat::generate_instance(cfg.channel, j.I, cfg.K, j.seed);
    inst.validate();
    const std::string file = fmt::format("instance_I{}_K{}_seed{}.json", j.I, cfg.K, j.seed);
    rat::save_instance(inst, std::filesystem::path(cfg.out) / file);
    t.rows.push_back({std::to_string(j.seed), std::to_string(j.I), std::to_string(cfg.K), file});
  }
  out.phases.emplace_back("generate", seconds_since(t0));
  out.tables = {t};
  out.report = fmt::format("wrote {} instance files to {}\n", t.rows.size(), cfg.out);
  return out;
}

RunOutput run(const ExperimentConfig& cfg) {
  if (cfg.kind == "cdf") return run_cdf(cfg);
  if (cfg.kind == "lambda-sweep") return run_lambda_sweep(cfg);
  if (cfg.kind == "convergence") return run_convergence(cfg);
  if (cfg.kind == "solve-one") return run_solve_one(cfg);
  if (cfg.kind == "oracle") return run_oracle(cfg);
  if (cfg.kind == "gen") return run_gen(cfg);
  throw std::invalid_argument(fmt::format("kind: unknown experiment '{}'", cfg.kind));
}

void write_outputs(const ExperimentConfig& cfg, const RunOutput& out) {
  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  for (const auto& t : out.tables) {
    std::ofstream f(dir / (t.name + ".csv"), std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot write {}", (dir / (t.name + ".csv")).string()));
    f << t.csv();
  }
  std::ofstream m(dir / "manifest.txt", std::ios::binary);
  if (!m) throw std::runtime_error(fmt::format("cannot write {}", (dir / "manifest.txt").string()));
  m << "mipreg " << version() << "\n";
  m << "command: " << cfg.kind << "\n";
  m << "config_hash: " << config_hash(cfg) << "\n";
  m << "transmit_power_dbm: " << num(cfg.channel.power_dbm) << "\n";
  m << "rate_units: bit/s (solver objective and lambda in Mbit/s)\n";
  for (const auto& t : out.tables) m << "table: " << t.name << ".csv rows=" << t.rows.size() << "\n";
  for (const auto& [phase, secs] : out.phases) m << fmt::format("phase {}: {:.3f} s\n", phase, secs);
  for (const auto& n : out.notes) m << n << "\n";
  m << "config:\n" << config_to_json(cfg);
}

}  // namespace mipreg::experiments
