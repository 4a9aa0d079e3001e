#include "sprt_exact/solver.hpp"

#include "sprt_exact/error.hpp"
#include "sprt_exact/parallel.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>

namespace sprt_exact {
namespace {

// Doublings allowed when pushing a bracket outwards.
constexpr int kBracketExpansions = 60;
// Penalty returned for points the scale function cannot evaluate.
constexpr double kUnevaluable = 1e300;
// A minimizer closer than this to a = 0 or b = 0 counts as on the boundary.
constexpr double kBoundarySnap = 1e-5;
constexpr double kProbeStep = 1e-3;
constexpr double kFlatTol = 1e-12;

struct Root {
  double x;
  double residual;
};

bool tight(double l, double h) { return std::abs(h - l) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(l)); }

// Root of f on [lo, hi] with f(lo), f(hi) of opposite sign.
template <class F>
Root bracketed_root(F f, double lo, double hi, double flo, double fhi, int max_iter, const char* what) {
  if (flo == 0.0) return Root{lo, 0.0};
  if (fhi == 0.0) return Root{hi, 0.0};
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tight, iters);
  if (iters >= static_cast<std::uintmax_t>(max_iter) && !tight(r.first, r.second)) {
    std::ostringstream os;
    os << what << " did not converge within " << max_iter << " iterations";
    throw Error(ErrorKind::NoConvergence, os.str());
  }
  const double fa = f(r.first);
  const double fb = f(r.second);
  return std::abs(fa) <= std::abs(fb) ? Root{r.first, fa} : Root{r.second, fb};
}

struct InnerRoot {
  double a;
  double residual;  // alpha0(a, b) - target
};

// a <= 0 with alpha0(a, b) = target; a = 0 when even a = 0 gives too small an alpha0.
InnerRoot solve_a(const TestProblem& p, double b, double target, int max_iter) {
  auto f = [&](double a) { return errors(p, Boundaries{a, b}).alpha0 - target; };
  const double f0 = f(0.0);
  if (f0 <= 0.0) return InnerRoot{0.0, f0};
  double hi = 0.0;
  double fhi = f0;
  double lo = -1.0;
  double flo = f(lo);
  for (int k = 0; flo > 0.0; ++k) {
    if (k == kBracketExpansions) throw Error(ErrorKind::NoConvergence, "no lower boundary reaches the alpha0 target");
    hi = lo;
    fhi = flo;
    lo *= 2.0;
    flo = f(lo);
  }
  const Root r = bracketed_root(f, lo, hi, flo, fhi, max_iter, "root find on a");
  return InnerRoot{r.x, r.residual};
}

// b >= 0 with alpha1(0, b) = target.
double solve_b_upper_branch(const TestProblem& p, double target, int max_iter) {
  auto f = [&](double b) { return errors(p, Boundaries{0.0, b}).alpha1 - target; };
  double lo = 0.0;
  double flo = f(lo);
  if (flo <= 0.0) return 0.0;
  double hi = 1.0;
  double fhi = f(hi);
  for (int k = 0; fhi > 0.0; ++k) {
    if (k == kBracketExpansions) throw Error(ErrorKind::NoConvergence, "no upper boundary reaches the alpha1 target");
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    fhi = f(hi);
  }
  return bracketed_root(f, lo, hi, flo, fhi, max_iter, "root find on b").x;
}

// Limit of errors() along a ray where one boundary runs off to infinity;
// stops at the last evaluable point if precision runs out first.
ErrorPair ray_limit(const TestProblem& p, bool lower) {
  ErrorPair last = errors(p, Boundaries{0.0, 0.0});
  for (double s = 1.0; s < 1e4; s *= 2.0) {
    ErrorPair e{};
    try {
      e = errors(p, lower ? Boundaries{-s, 0.0} : Boundaries{0.0, s});
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::SeriesOverflow || err.kind() == ErrorKind::IllConditionedSolve) break;
      throw;
    }
    const double change = lower ? std::abs(e.alpha1 - last.alpha1) : std::abs(e.alpha0 - last.alpha0);
    last = e;
    if (change < 1e-13) break;
  }
  return lower ? ErrorPair{0.0, last.alpha1} : ErrorPair{last.alpha0, 0.0};
}

double interpolate(const std::vector<ErrorPair>& curve, double key, bool by_alpha0) {
  // curve runs from the star point towards key = 0; keys decrease along it.
  const auto k = [&](const ErrorPair& e) { return by_alpha0 ? e.alpha0 : e.alpha1; };
  const auto v = [&](const ErrorPair& e) { return by_alpha0 ? e.alpha1 : e.alpha0; };
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double k0 = k(curve[i - 1]);
    const double k1 = k(curve[i]);
    if (key <= k0 && key >= k1) {
      const double w = k0 == k1 ? 0.0 : (key - k1) / (k0 - k1);
      return v(curve[i]) + w * (v(curve[i - 1]) - v(curve[i]));
    }
  }
  return v(curve.back());
}

void check_spec(const PenaltySpec& s) {
  if (!(s.prior >= 0.0 && s.prior <= 1.0)) throw Error(ErrorKind::InvalidArgument, "prior must lie in [0,1]");
  if (!(s.c > 0.0 && s.c0 > 0.0 && s.c1 > 0.0)) throw Error(ErrorKind::InvalidArgument, "costs c, c0, c1 must be positive");
}

struct Objective {
  const TestProblem* problem;
  const PenaltySpec* spec;
};

double objective_at(const Objective& o, double u, double v) {
  try {
    const double g = penalty(*o.problem, *o.spec, Boundaries{-std::abs(u), std::abs(v)});
    return std::isfinite(g) ? g : kUnevaluable;
  } catch (const Error&) {
    return kUnevaluable;
  }
}

double gsl_objective(const gsl_vector* x, void* params) {
  return objective_at(*static_cast<const Objective*>(params), gsl_vector_get(x, 0), gsl_vector_get(x, 1));
}

struct Minimum {
  double u;
  double v;
  double value;
  bool converged;
};

Minimum nelder_mead(const Objective& o, double u0, double v0, double tol) {
  constexpr int kMaxIter = 2000;
  static std::once_flag quiet;
  std::call_once(quiet, [] { gsl_set_error_handler_off(); });
  gsl_multimin_function fn{&gsl_objective, 2, const_cast<Objective*>(&o)};
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(2), &gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(2), &gsl_vector_free);
  gsl_vector_set(x.get(), 0, u0);
  gsl_vector_set(x.get(), 1, v0);
  gsl_vector_set_all(step.get(), 0.5 * std::min(u0, v0));
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2), &gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), step.get());
  bool converged = false;
  for (int it = 0; it < kMaxIter && !converged; ++it) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    converged = gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), tol) == GSL_SUCCESS;
  }
  const gsl_vector* best = gsl_multimin_fminimizer_x(m.get());
  return Minimum{std::abs(gsl_vector_get(best, 0)), std::abs(gsl_vector_get(best, 1)),
                 gsl_multimin_fminimizer_minimum(m.get()), converged};
}

}  // namespace

Boundaries solve_boundaries(const TestProblem& problem, const ErrorPair& target, double tol, int max_iter) {
  const BBounds bb = b_bounds(problem, target);  // validates the target
  if (!(tol > 0.0) || max_iter < 1) throw Error(ErrorKind::InvalidArgument, "tol and max_iter must be positive");
  if (bb.b_high < 0.0) {
    throw Error(ErrorKind::OutsideOptimalityRegion, "the improved bounds force b < 0");
  }

  InnerRoot inner{};
  auto h = [&](double b) {
    inner = solve_a(problem, b, target.alpha0, max_iter);
    return errors(problem, Boundaries{inner.a, b}).alpha1 - target.alpha1;
  };

  double b = 0.0;
  const double lo = std::max(0.0, bb.b_low);
  if (bb.b_high - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, lo)) {
    // m = M: the improved bounds pin b (exponential observations).
    b = bb.b_high;
    h(b);
  } else {
    const double hlo = h(lo);
    if (hlo < 0.0) {
      throw Error(ErrorKind::OutsideOptimalityRegion, "alpha1 target is not reached even with b = 0");
    }
    double hi = bb.b_high;
    double hhi = h(hi);
    const double cap = wald_bounds(target).b_upper + 1.0;
    while (hhi > 0.0 && hi < cap) {
      hi = std::min(cap, hi + 0.25);
      hhi = h(hi);
    }
    if (hhi > 0.0) {
      throw Error(ErrorKind::OutsideOptimalityRegion, "alpha1 target is not reached within the improved bounds");
    }
    b = bracketed_root(h, lo, hi, hlo, hhi, max_iter, "root find on b").x;
    h(b);
  }

  if (inner.a == 0.0 && inner.residual < -tol) {
    std::ostringstream os;
    os << "alpha0 target needs a > 0 (alpha0 at a = 0 is " << target.alpha0 + inner.residual << ")";
    throw Error(ErrorKind::OutsideOptimalityRegion, os.str());
  }
  const Boundaries out{inner.a, b};
  const ErrorPair got = errors(problem, out);
  if (std::abs(got.alpha0 - target.alpha0) > tol || std::abs(got.alpha1 - target.alpha1) > tol) {
    std::ostringstream os;
    os << "achieved errors (" << got.alpha0 << ", " << got.alpha1 << ") miss the target by more than " << tol;
    throw Error(got.alpha0 > target.alpha0 + tol || b == 0.0 ? ErrorKind::OutsideOptimalityRegion
                                                              : ErrorKind::NoConvergence,
                os.str());
  }
  return out;
}

RegionBoundary optimality_region(const TestProblem& problem, int grid_size) {
  if (grid_size < 2) throw Error(ErrorKind::InvalidArgument, "grid_size must be at least 2");
  const ErrorPair star = errors(problem, Boundaries{0.0, 0.0});
  const auto g = static_cast<std::size_t>(grid_size);
  std::vector<ErrorPair> lower(g);
  std::vector<ErrorPair> upper(g);
  parallel_for(2 * g, [&](std::size_t idx) {
    const bool is_lower = idx < g;
    const std::size_t i = is_lower ? idx : idx - g;
    auto& slot = is_lower ? lower[i] : upper[i];
    try {
      if (i == 0) {
        slot = star;
      } else if (i + 1 == g) {
        slot = ray_limit(problem, is_lower);
      } else {
        const double frac = 1.0 - static_cast<double>(i) / static_cast<double>(g - 1);
        if (is_lower) {
          const double a0 = star.alpha0 * frac;
          const InnerRoot r = solve_a(problem, 0.0, a0, kDefaultIterationCap);
          slot = ErrorPair{a0, errors(problem, Boundaries{r.a, 0.0}).alpha1};
        } else {
          const double a1 = star.alpha1 * frac;
          const double b = solve_b_upper_branch(problem, a1, kDefaultIterationCap);
          slot = ErrorPair{errors(problem, Boundaries{0.0, b}).alpha0, a1};
        }
      }
    } catch (const Error& e) {
      std::ostringstream os;
      os << (is_lower ? "lower" : "upper") << " curve node " << i << ": " << e.what();
      throw Error(e.kind(), os.str());
    }
  });
  return RegionBoundary{star, std::move(lower), std::move(upper)};
}

bool in_region(const RegionBoundary& region, const ErrorPair& target) {
  const ErrorPair& s = region.star_point;
  if (target.alpha0 < 0.0 || target.alpha1 < 0.0) return false;
  if (target.alpha0 <= s.alpha0) return target.alpha1 < interpolate(region.lower_curve, target.alpha0, true);
  if (target.alpha1 >= s.alpha1) return false;
  return target.alpha0 < interpolate(region.upper_curve, target.alpha1, false);
}

double penalty(const TestProblem& problem, const PenaltySpec& spec, const Boundaries& bounds) {
  check_spec(spec);
  const Evaluation e = evaluate(problem, bounds);
  const double pi = spec.prior;
  return pi * (spec.c * e.e0n + spec.c0 * e.errors.alpha0) + (1.0 - pi) * (spec.c * e.e1n + spec.c1 * e.errors.alpha1);
}

BayesResult bayes_optimal(const TestProblem& problem, const PenaltySpec& spec, double tol) {
  check_spec(spec);
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  const Objective obj{&problem, &spec};
  // Log-spaced lattice of starting points in (-a, b).
  constexpr std::array<std::array<double, 2>, 5> starts{{{0.25, 0.25}, {0.25, 4.0}, {4.0, 0.25}, {1.0, 1.0}, {4.0, 4.0}}};
  std::vector<Minimum> found(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { found[i] = nelder_mead(obj, starts[i][0], starts[i][1], tol); });

  Minimum best{0.0, 0.0, std::numeric_limits<double>::infinity(), false};
  for (const auto& m : found) {
    if (m.converged && m.value < best.value) best = m;
  }
  if (!best.converged || !(best.value < kUnevaluable)) {
    throw Error(ErrorKind::NoConvergence, "no Nelder-Mead start converged");
  }

  // Probe; restart from any neighbour that improves on the minimum.
  bool flat = false;
  for (int restart = 0; restart < 3; ++restart) {
    bool improved = false;
    flat = false;
    for (int coord = 0; coord < 2 && !improved; ++coord) {
      std::array<double, 2> deltas{};
      for (int sgn = 0; sgn < 2; ++sgn) {
        double u = best.u;
        double v = best.v;
        (coord == 0 ? u : v) += sgn == 0 ? kProbeStep : -kProbeStep;
        if (u < 0.0 || v < 0.0) {
          deltas[static_cast<std::size_t>(sgn)] = std::numeric_limits<double>::infinity();
          continue;
        }
        const double val = objective_at(obj, u, v);
        deltas[static_cast<std::size_t>(sgn)] = val - best.value;
        if (val < best.value - kFlatTol) {
          const Minimum m = nelder_mead(obj, std::max(u, kProbeStep), std::max(v, kProbeStep), tol);
          if (m.converged && m.value < best.value) {
            best = m;
            improved = true;
          }
          break;
        }
      }
      if (std::abs(deltas[0]) <= kFlatTol && std::abs(deltas[1]) <= kFlatTol) flat = true;
    }
    if (!improved) break;
  }

  BayesResult out{Boundaries{-best.u, best.v}, best.value, std::nullopt, {}};
  if (best.u < kBoundarySnap) out.bounds.a = 0.0;
  if (best.v < kBoundarySnap) out.bounds.b = 0.0;
  const double stop_reject = spec.prior * spec.c0;
  const double stop_accept = (1.0 - spec.prior) * spec.c1;
  if (out.bounds.a == 0.0) {
    out.reason = "minimizer on a = 0";
  } else if (out.bounds.b == 0.0) {
    out.reason = "minimizer on b = 0";
  } else if (std::min(stop_reject, stop_accept) <= best.value) {
    out.reason = "deciding without observations is at least as good";
  } else if (flat) {
    out.reason = "penalty flat around the minimizer";
  } else if (spec.prior <= 0.0 || spec.prior >= 1.0) {
    out.reason = "prior 0 or 1 leaves the posterior map undefined";
  } else {
    out.posterior = posterior_boundaries(out.bounds, spec.prior);
  }
  return out;
}

PosteriorBoundaries posterior_boundaries(const Boundaries& bounds, double prior) {
  if (!(prior > 0.0 && prior < 1.0)) throw Error(ErrorKind::InvalidArgument, "prior must lie in (0,1)");
  const double offset = std::log((1.0 - prior) / prior);
  const auto logistic = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  return PosteriorBoundaries{logistic(bounds.a - offset), logistic(bounds.b - offset)};
}

Boundaries llr_boundaries(const PosteriorBoundaries& posterior, double prior) {
  if (!(prior > 0.0 && prior < 1.0)) throw Error(ErrorKind::InvalidArgument, "prior must lie in (0,1)");
  const double offset = std::log((1.0 - prior) / prior);
  const auto logit = [](double p) { return std::log(p / (1.0 - p)); };
  return Boundaries{logit(posterior.a_star) + offset, logit(posterior.b_star) + offset};
}

}  // namespace sprt_exact
