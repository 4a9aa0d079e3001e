#pragma once

#include "sprt_exact/sprt.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sprt_exact {

inline constexpr double kDefaultSolveTol = 1e-10;
inline constexpr int kDefaultIterationCap = 200;

/// Boundaries whose exact errors match `target`. Nested root finds: the
/// outer one on b inside b_bounds(), the inner one on a matching alpha0.
/// Throws OutsideOptimalityRegion when the match needs a or b pinned at 0,
/// NoConvergence when a root find exhausts `max_iter`.
Boundaries solve_boundaries(const TestProblem& problem, const ErrorPair& target, double tol = kDefaultSolveTol,
                            int max_iter = kDefaultIterationCap);

/// Boundary of the set R of error pairs reachable with a < 0 < b.
struct RegionBoundary {
  ErrorPair star_point;             ///< errors at a = b = 0
  std::vector<ErrorPair> lower_curve;  ///< b = 0, from the star point to alpha0 = 0
  std::vector<ErrorPair> upper_curve;  ///< a = 0, from the star point to alpha1 = 0
};

/// Sweeps grid_size nodes along each branch. Grid nodes run in parallel.
RegionBoundary optimality_region(const TestProblem& problem, int grid_size);

/// Strictly below the piecewise-linear boundary.
bool in_region(const RegionBoundary& region, const ErrorPair& target);

struct PenaltySpec {
  double prior;  ///< pi = P(H0)
  double c;      ///< cost per observation
  double c0;     ///< cost of rejecting a true H0
  double c1;     ///< cost of rejecting a true H1
};

/// pi (c E0 N + c0 alpha0) + (1 - pi) (c E1 N + c1 alpha1).
double penalty(const TestProblem& problem, const PenaltySpec& spec, const Boundaries& bounds);

struct PosteriorBoundaries {
  double a_star;
  double b_star;
};

struct BayesResult {
  Boundaries bounds;
  double penalty;
  /// Empty when the minimizer is not unique (NonUniqueFlag); `reason` says why.
  std::optional<PosteriorBoundaries> posterior;
  std::string reason;

  bool non_unique() const { return !posterior.has_value(); }
};

/// Minimizes the penalty over a <= 0 <= b with a multi-start Nelder-Mead
/// search. The posterior thresholds are reported only for an interior
/// minimizer that beats both zero-observation decisions and passes a local
/// uniqueness probe.
BayesResult bayes_optimal(const TestProblem& problem, const PenaltySpec& spec, double tol = 1e-6);

/// x* = logistic(x - log((1 - pi) / pi)) for x in {a, b}.
PosteriorBoundaries posterior_boundaries(const Boundaries& bounds, double prior);

/// Inverse of posterior_boundaries: x = log(x* / (1 - x*)) + log((1 - pi) / pi).
Boundaries llr_boundaries(const PosteriorBoundaries& posterior, double prior);

}  // namespace sprt_exact
