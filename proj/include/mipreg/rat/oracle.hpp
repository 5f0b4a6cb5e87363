#pragma once

// Exhaustive search over all K^I assignments.

#include <stdexcept>

#include "mipreg/rat/instance.hpp"

namespace mipreg::rat {

/// K^I above this is refused.
inline constexpr double kOracleLimit = 1e7;

class OracleSizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct OracleResult {
  Assignment best;
  double value = 0.0;  // aggregate throughput, bits/s
  long long feasible_count = 0;
};

/// Feasible maximizer of the aggregate throughput. Assignments are ordered
/// lexicographically (user 0 most significant); ties go to the first.
/// Parallel over index ranges with OpenMP; threads <= 0 uses the runtime default.
OracleResult exhaustive_oracle(const RatInstance& inst, int threads = 0);

/// Single-threaded reference with the same ordering and tie-break.
OracleResult exhaustive_oracle_serial(const RatInstance& inst);

/// chi = 1 - f_star / f_alg (nonpositive for a maximization) and the gap
/// chi_gap = 1 - f_alg / f_star used for acceptance.
struct RelativeError {
  double chi = 0.0;
  double chi_gap = 0.0;
};

RelativeError relative_error(double f_star, double f_alg);

}  // namespace mipreg::rat
