#pragma once

#include "sprt_exact/sprt.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace sprt_exact {

struct SimConfig {
  std::uint64_t replications = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t max_steps = 1'000'000;
};

struct Estimate {
  double value;
  double std_error;
};

struct SimResult {
  std::uint64_t replications;
  std::uint64_t capped_count;  ///< replications stopped by max_steps; excluded below
  Estimate reject_h0;          ///< fraction exiting at or below a
  Estimate accept_h0;          ///< fraction exiting at or above b
  std::optional<Estimate> alpha0_hat;  ///< reject_h0 of an H0 run
  std::optional<Estimate> alpha1_hat;  ///< accept_h0 of an H1 run
  Estimate mean_n;
  std::vector<std::pair<double, Estimate>> pgf_at;  ///< z -> mean of z^N
};

/// Simulates Lambda_k = sum (theta zeta_i - d) under the chosen hypothesis
/// until Lambda_k <= a or Lambda_k >= b. Replications are drawn in fixed
/// blocks, each with its own seeded stream, so the result does not depend on
/// the number of worker threads. Throws AllCapped if no replication exits.
SimResult run(const TestProblem& problem, const Boundaries& bounds, Hypothesis h, const SimConfig& config,
              const std::vector<double>& z_points = {});

/// (k, Lambda_k) for k = 0..steps, ignoring the boundaries.
std::vector<std::pair<std::uint64_t, double>> sample_path(const TestProblem& problem, Hypothesis h,
                                                          std::uint64_t steps, std::uint64_t seed);

}  // namespace sprt_exact
