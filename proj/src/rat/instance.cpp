#include "mipreg/rat/instance.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace mipreg::rat {

void ChannelConfig::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("channel: radius must be positive");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("channel: bandwidth must be positive");
  if (!(pathloss_exponent > 0.0)) throw std::invalid_argument("channel: pathloss exponent must be positive");
  if (!(min_distance > 0.0)) throw std::invalid_argument("channel: min distance must be positive");
  if (!(rayleigh_sigma > 0.0)) throw std::invalid_argument("channel: rayleigh sigma must be positive");
  if (!std::isfinite(power_dbm) || !std::isfinite(noise_dbm_per_hz)) {
    throw std::invalid_argument("channel: power and noise must be finite");
  }
}

std::vector<int> RatInstance::stations_of(int m) const {
  std::vector<int> out;
  for (int k = 0; k < K; ++k)
    if (rat_of[static_cast<std::size_t>(k)] == m) out.push_back(k);
  return out;
}

double RatInstance::max_rate(int m) const {
  double v = 0.0;
  for (int k : stations_of(m)) v = std::max(v, rate.col(k).maxCoeff());
  return v;
}

double RatInstance::min_rate(int m) const {
  double v = std::numeric_limits<double>::infinity();
  for (int k : stations_of(m)) v = std::min(v, rate.col(k).minCoeff());
  return v;
}

namespace {

// Exhaustive search for any assignment passing check_constraints.
bool scan_feasible(const RatInstance& inst) {
  Assignment a(static_cast<std::size_t>(inst.I), 0);
  while (true) {
    if (check_constraints(inst, a).feasible) return true;
    int i = inst.I - 1;
    while (i >= 0 && ++a[static_cast<std::size_t>(i)] == inst.K) a[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) return false;
  }
}

}  // namespace

void RatInstance::validate() const {
  if (I < 1) throw std::invalid_argument("instance: I must be at least 1");
  if (K < 2) throw std::invalid_argument("instance: K must be at least 2");
  if (static_cast<int>(rat_of.size()) != K) throw std::invalid_argument("instance: rat_of must have K entries");
  for (int k = 0; k < K; ++k) {
    const int m = rat_of[static_cast<std::size_t>(k)];
    if (m != 1 && m != 2) throw std::invalid_argument(fmt::format("instance: rat_of[{}] = {} is not 1 or 2", k, m));
  }
  if (stations_of(1).empty() || stations_of(2).empty()) {
    throw std::invalid_argument("instance: both technologies need at least one station");
  }
  if (rate.rows() != I || rate.cols() != K) throw std::invalid_argument("instance: rate matrix must be I x K");
  for (int i = 0; i < I; ++i)
    for (int k = 0; k < K; ++k)
      if (!(rate(i, k) > 0.0) || !std::isfinite(rate(i, k))) {
        throw std::invalid_argument(fmt::format("instance: rate[{}][{}] must be positive and finite", i, k));
      }
  if (alpha.size() != I) throw std::invalid_argument("instance: alpha must have I entries");
  for (int i = 0; i < I; ++i)
    if (!(alpha[i] > 0.0) || !std::isfinite(alpha[i])) {
      throw std::invalid_argument(fmt::format("instance: alpha[{}] must be positive", i));
    }
  if (static_cast<int>(k_max.size()) != K) throw std::invalid_argument("instance: k_max must have K entries");

  for (int m = 0; m < 2; ++m) {
    if (n_max[static_cast<std::size_t>(m)] < 1) {
      throw InfeasibleInputError(fmt::format("cap n_max for RAT-{} is {}; it must be a positive integer", m + 1,
                                             n_max[static_cast<std::size_t>(m)]));
    }
    if (!(w_max[static_cast<std::size_t>(m)] > 0.0)) {
      throw InfeasibleInputError(fmt::format("cap w_max for RAT-{} is {}; it must be positive", m + 1,
                                             w_max[static_cast<std::size_t>(m)]));
    }
  }
  for (int k = 0; k < K; ++k) {
    if (k_max[static_cast<std::size_t>(k)] < 1) {
      throw InfeasibleInputError(fmt::format("cap k_max for station {} is {}; it must be a positive integer", k,
                                             k_max[static_cast<std::size_t>(k)]));
    }
  }
  long capacity = 0;
  for (int m = 1; m <= 2; ++m) {
    long stations = 0;
    for (int k : stations_of(m)) stations += k_max[static_cast<std::size_t>(k)];
    capacity += std::min<long>(n_max[static_cast<std::size_t>(m - 1)], stations);
  }
  if (capacity < I) {
    throw InfeasibleInputError(fmt::format(
        "caps n_max/k_max admit only {} users but the instance has {}", capacity, I));
  }
  const auto witness = round_robin_assignment(*this);
  if (witness && check_constraints(*this, *witness).feasible) return;
  if (std::pow(static_cast<double>(K), I) <= 1e6 && scan_feasible(*this)) return;
  throw InfeasibleInputError("no assignment found that satisfies the throughput caps w_max (C1)");
}

Eigen::MatrixXd to_matrix(const RatInstance& inst, const Assignment& a) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(inst.I, inst.K);
  for (int i = 0; i < inst.I; ++i) x(i, a[static_cast<std::size_t>(i)]) = 1.0;
  return x;
}

namespace {

struct Loads {
  double n1 = 0, v1 = 0, n2 = 0, v2 = 0;  // weighted numerators, denominators
};

Loads loads_of(const RatInstance& inst, const Assignment& a) {
  Loads s;
  for (int i = 0; i < inst.I; ++i) {
    const int k = a[static_cast<std::size_t>(i)];
    const double r = inst.rate(i, k);
    if (inst.rat_of[static_cast<std::size_t>(k)] == 1) {
      s.n1 += inst.alpha[i];
      s.v1 += 1.0 / r;
    } else {
      s.n2 += inst.alpha[i] * r;
      s.v2 += 1.0;
    }
  }
  return s;
}

void check_assignment(const RatInstance& inst, const Assignment& a) {
  if (static_cast<int>(a.size()) != inst.I) throw std::invalid_argument("assignment must have I entries");
  for (int k : a)
    if (k < 0 || k >= inst.K) throw std::invalid_argument("assignment refers to a missing station");
}

}  // namespace

double aggregate_throughput(const RatInstance& inst, const Assignment& a) {
  const Loads s = loads_of(inst, a);
  return (s.v1 > 0.0 ? s.n1 / s.v1 : 0.0) + (s.v2 > 0.0 ? s.n2 / s.v2 : 0.0);
}

Throughput throughput(const RatInstance& inst, const Assignment& a) {
  check_assignment(inst, a);
  const Loads s = loads_of(inst, a);
  Throughput t;
  t.per_user = Vec::Zero(inst.I);
  for (int i = 0; i < inst.I; ++i) {
    const int k = a[static_cast<std::size_t>(i)];
    t.per_user[i] = inst.rat_of[static_cast<std::size_t>(k)] == 1 ? 1.0 / s.v1 : inst.rate(i, k) / s.v2;
  }
  t.aggregate = inst.alpha.dot(t.per_user);
  return t;
}

ConstraintReport check_constraints(const RatInstance& inst, const Assignment& a, double rel_tol) {
  check_assignment(inst, a);
  ConstraintReport rep;
  auto fail = [&rep](std::string msg) {
    rep.feasible = false;
    rep.violations.push_back(std::move(msg));
  };
  std::array<int, 2> count{};
  std::array<double, 2> sum_w{};
  std::vector<int> per_station(static_cast<std::size_t>(inst.K), 0);
  double v1 = 0.0;
  for (int i = 0; i < inst.I; ++i) {
    const int k = a[static_cast<std::size_t>(i)];
    ++per_station[static_cast<std::size_t>(k)];
    const int m = inst.rat_of[static_cast<std::size_t>(k)];
    ++count[static_cast<std::size_t>(m - 1)];
    if (m == 1) v1 += 1.0 / inst.rate(i, k);
  }
  for (int i = 0; i < inst.I; ++i) {
    const int k = a[static_cast<std::size_t>(i)];
    if (inst.rat_of[static_cast<std::size_t>(k)] == 1) {
      sum_w[0] += 1.0 / v1;
    } else {
      sum_w[1] += inst.rate(i, k) / count[1];
    }
  }
  for (int m = 0; m < 2; ++m) {
    const auto mm = static_cast<std::size_t>(m);
    if (sum_w[mm] > inst.w_max[mm] * (1.0 + rel_tol)) {
      fail(fmt::format("C1: RAT-{} throughput {:.12g} exceeds w_max {:.12g}", m + 1, sum_w[mm], inst.w_max[mm]));
    }
    if (count[mm] > inst.n_max[mm]) {
      fail(fmt::format("C2: RAT-{} serves {} users, n_max is {}", m + 1, count[mm], inst.n_max[mm]));
    }
  }
  for (int k = 0; k < inst.K; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    if (per_station[kk] > inst.k_max[kk]) {
      fail(fmt::format("C4: station {} serves {} users, k_max is {}", k, per_station[kk], inst.k_max[kk]));
    }
  }
  return rep;
}

AuxiliaryVariables auxiliary_from(const RatInstance& inst, const Eigen::MatrixXd& x, double scale) {
  AuxiliaryVariables aux;
  aux.u = Vec::Zero(inst.I);
  for (int i = 0; i < inst.I; ++i) {
    for (int k = 0; k < inst.K; ++k) {
      const double r = inst.rate(i, k) * scale;
      if (inst.rat_of[static_cast<std::size_t>(k)] == 1) {
        aux.v1 += x(i, k) / r;
      } else {
        aux.v2 += x(i, k);
        aux.u[i] += x(i, k) * r;
      }
    }
  }
  return aux;
}

std::optional<Assignment> round_robin_assignment(const RatInstance& inst) {
  std::vector<int> station_left = inst.k_max;
  std::array<int, 2> rat_left = inst.n_max;
  Assignment a(static_cast<std::size_t>(inst.I), -1);
  for (int i = 0; i < inst.I; ++i) {
    for (int j = 0; j < inst.K; ++j) {
      const int k = (i + j) % inst.K;
      const auto m = static_cast<std::size_t>(inst.rat_of[static_cast<std::size_t>(k)] - 1);
      if (station_left[static_cast<std::size_t>(k)] > 0 && rat_left[m] > 0) {
        --station_left[static_cast<std::size_t>(k)];
        --rat_left[m];
        a[static_cast<std::size_t>(i)] = k;
        break;
      }
    }
    if (a[static_cast<std::size_t>(i)] < 0) return std::nullopt;
  }
  return a;
}

Assignment decode(const RatInstance& inst, const Vec& x) {
  if (x.size() != static_cast<Eigen::Index>(inst.I) * inst.K) throw std::invalid_argument("decode: wrong length");
  Assignment a(static_cast<std::size_t>(inst.I), 0);
  for (int i = 0; i < inst.I; ++i) {
    int best = 0;
    for (int k = 1; k < inst.K; ++k)
      if (x[i * inst.K + k] > x[i * inst.K + best]) best = k;
    a[static_cast<std::size_t>(i)] = best;
  }
  return a;
}

Vec encode(const RatInstance& inst, const Assignment& a) {
  Vec x = Vec::Zero(static_cast<Eigen::Index>(inst.I) * inst.K);
  for (int i = 0; i < inst.I; ++i) x[i * inst.K + a[static_cast<std::size_t>(i)]] = 1.0;
  return x;
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

double rayleigh(double sigma, double u) { return sigma * std::sqrt(-2.0 * std::log1p(-u)); }

RatInstance generate_instance(const ChannelConfig& cfg, int I, int K, std::uint64_t seed) {
  cfg.validate();
  if (I < 1) throw std::invalid_argument("generate_instance: I must be at least 1");
  if (K < 2) throw std::invalid_argument("generate_instance: K must be at least 2");

  // Draw order: per user radius then angle, then psi row by row. std::
  // distributions are avoided because their output is library-specific.
  std::mt19937_64 eng(seed);
  auto u01 = [&eng] { return unit_uniform(eng()); };
  Eigen::MatrixXd user(I, 2);
  for (int i = 0; i < I; ++i) {
    const double rho = cfg.radius * std::sqrt(u01());
    const double theta = 2.0 * std::numbers::pi * u01();
    user(i, 0) = rho * std::cos(theta);
    user(i, 1) = rho * std::sin(theta);
  }
  const double p_watt = std::pow(10.0, (cfg.power_dbm - 30.0) / 10.0);
  const double n0_watt = std::pow(10.0, (cfg.noise_dbm_per_hz - 30.0) / 10.0);
  const double noise = n0_watt * cfg.bandwidth;

  RatInstance inst;
  inst.I = I;
  inst.K = K;
  inst.rate.resize(I, K);
  for (int k = 0; k < K; ++k) inst.rat_of.push_back(k % 2 == 0 ? 1 : 2);
  for (int i = 0; i < I; ++i) {
    for (int k = 0; k < K; ++k) {
      // K = 2 puts the stations at (R/2, 0) and (-R/2, 0).
      const double phi = 2.0 * std::numbers::pi * k / K;
      const double dx = user(i, 0) - 0.5 * cfg.radius * std::cos(phi);
      const double dy = user(i, 1) - 0.5 * cfg.radius * std::sin(phi);
      const double d = std::max(std::hypot(dx, dy), cfg.min_distance);
      const double psi = rayleigh(cfg.rayleigh_sigma, u01());
      const double h = psi * std::pow(d, -cfg.pathloss_exponent);
      inst.rate(i, k) = cfg.bandwidth * std::log2(1.0 + p_watt * h / noise);
    }
  }
  inst.alpha = Vec::Ones(I);
  inst.n_max = {std::max(I - 1, 1), std::max(I - 1, 1)};
  inst.w_max = {inst.max_rate(1), inst.max_rate(2)};
  inst.k_max.assign(static_cast<std::size_t>(K), I);
  inst.channel = cfg;
  inst.seed = seed;
  return inst;
}

}  // namespace mipreg::rat
