#pragma once

// User-to-station assignment instances for two radio access technologies.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mipreg/errors.hpp"

namespace mipreg::rat {

struct ChannelConfig {
  double radius = 50.0;             // m
  double pathloss_exponent = 3.0;
  double bandwidth = 180e3;         // Hz
  double noise_dbm_per_hz = -174.0;
  double power_dbm = 20.0;
  double min_distance = 1.0;        // m; keeps d^-3 finite
  double rayleigh_sigma = 0.70710678118654752;  // E[psi^2] = 2 sigma^2 = 1

  void validate() const;
};

struct RatInstance {
  int I = 0;
  int K = 0;
  std::vector<int> rat_of;  // per station, 1 or 2
  Eigen::MatrixXd rate;     // I x K, bits/s
  Vec alpha;                // I
  std::array<int, 2> n_max{};
  std::array<double, 2> w_max{};
  std::vector<int> k_max;   // per station
  std::optional<ChannelConfig> channel;
  std::optional<std::uint64_t> seed;

  /// Structural checks plus existence of a feasible assignment. Throws
  /// std::invalid_argument for malformed data and InfeasibleInputError when
  /// the caps exclude every assignment.
  void validate() const;

  std::vector<int> stations_of(int m) const;
  double max_rate(int m) const;
  double min_rate(int m) const;
};

/// Station index per user.
using Assignment = std::vector<int>;

/// I x K indicator matrix of an assignment.
Eigen::MatrixXd to_matrix(const RatInstance& inst, const Assignment& a);

struct Throughput {
  Vec per_user;
  double aggregate = 0.0;
};

/// Per-user throughput and the weighted aggregate sum alpha_i w_i.
Throughput throughput(const RatInstance& inst, const Assignment& a);

/// Aggregate only; avoids allocation on the enumeration hot path.
double aggregate_throughput(const RatInstance& inst, const Assignment& a);

struct ConstraintReport {
  bool feasible = true;
  std::vector<std::string> violations;
};

/// Checks C1-C4 as written (C5 holds by construction of Assignment). C1 is
/// compared with relative tolerance rel_tol.
ConstraintReport check_constraints(const RatInstance& inst, const Assignment& a, double rel_tol = 1e-9);

struct AuxiliaryVariables {
  double v1 = 0.0;
  double v2 = 0.0;
  Vec u;
};

/// v1 = sum over RAT-1 of x/r, v2 = number on RAT-2, u_i = sum over RAT-2 of x r.
/// `scale` multiplies every rate first.
AuxiliaryVariables auxiliary_from(const RatInstance& inst, const Eigen::MatrixXd& x, double scale = 1.0);

/// Greedy assignment: user i tries stations i mod K, i+1 mod K, ... and takes
/// the first with spare station and technology capacity. Returns nullopt
/// when the caps run out.
std::optional<Assignment> round_robin_assignment(const RatInstance& inst);

/// Per-user argmax of a relaxed I*K vector (row-major, ties to the lower
/// station).
Assignment decode(const RatInstance& inst, const Vec& x);

/// Row-major I*K vector of an assignment.
Vec encode(const RatInstance& inst, const Assignment& a);

/// Random instance with the default cap parameterization: N_max = I - 1
/// (at least 1), w_max = largest rate of the technology, K_max = I,
/// alpha = 1. Stations alternate technology (even index RAT-1) and sit on a
/// circle of radius R/2.
RatInstance generate_instance(const ChannelConfig& cfg, int I, int K, std::uint64_t seed);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
double unit_uniform(std::uint64_t bits);

/// Rayleigh draw with scale sigma by inversion of u in [0, 1); E[psi^2] = 2 sigma^2.
double rayleigh(double sigma, double u);

}  // namespace mipreg::rat
