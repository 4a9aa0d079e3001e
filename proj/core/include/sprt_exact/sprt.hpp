#pragma once

#include "sprt_exact/phasetype.hpp"
#include "sprt_exact/scale.hpp"

namespace sprt_exact {

enum class Hypothesis { H0, H1 };

/// H0: observations with density f0 (PH). H1: its exponential tilt with
/// parameter theta. The log-likelihood ratio increments are theta*zeta - d.
class TestProblem {
 public:
  static TestProblem make(PhaseTypeDist ph0, double theta);

  const PhaseTypeDist& ph0() const { return ph0_; }
  const PhaseTypeDist& ph1() const { return tilt_.tilted; }
  double theta() const { return theta_; }
  const TiltResult& tilted() const { return tilt_; }
  double d() const { return tilt_.d; }
  const Vector& delta() const { return tilt_.delta; }

  /// Scale functions of the H0 and H1 models without killing.
  const ScaleMatrix& scale0() const { return scale0_; }
  const ScaleMatrix& scale1() const { return scale1_; }

 private:
  TestProblem(PhaseTypeDist ph0, double theta, TiltResult tilt);

  PhaseTypeDist ph0_;
  double theta_;
  TiltResult tilt_;
  ScaleMatrix scale0_;
  ScaleMatrix scale1_;
};

/// Continue while a < Lambda_k < b.
struct Boundaries {
  double a;
  double b;
};

struct ErrorPair {
  double alpha0;
  double alpha1;
};

/// alpha0 = 1 - nu0 W0(-a) W0(-a+b+d)^{-1} 1,
/// alpha1 = e^{-b} nu0 W0(-a) W0(-a+b+d)^{-1} delta.
/// a = 0 or b = 0 are evaluated with W0(0) = I / theta.
ErrorPair errors(const TestProblem& problem, const Boundaries& bounds);

struct WaldBounds {
  double a_lower;
  double b_upper;
};

/// (log(alpha1/(1-alpha0)), log((1-alpha1)/alpha0)). DegenerateTargets if
/// alpha0 + alpha1 >= 1.
WaldBounds wald_bounds(const ErrorPair& target);

struct BBounds {
  double b_low;
  double b_high;
};

/// log((1-alpha0)/alpha1) + log m <= b <= log((1-alpha0)/alpha1) + log M with
/// m, M the extreme entries of delta.
BBounds b_bounds(const TestProblem& problem, const ErrorPair& target);

/// E N under the chosen hypothesis. H1 is computed from the H0 scale
/// function and, independently, from the tilted model; a disagreement beyond
/// the route tolerance raises ScaleEvaluationFailed.
double expected_n(const TestProblem& problem, const Boundaries& bounds, Hypothesis h);

struct ExpectedNRoutes {
  double from_h0_scale;  // e^x D^{-1} W0 D
  double from_tilted;    // scale function of the tilted model
};
ExpectedNRoutes expected_n_h1_routes(const TestProblem& problem, const Boundaries& bounds);

/// E z^N, 0 < z <= 1.
double pgf_n(const TestProblem& problem, const Boundaries& bounds, double z, Hypothesis h);

struct Evaluation {
  ErrorPair errors;
  double e0n;
  double e1n;
};

/// errors() and both expected sample sizes from one pass over the H0 scale.
Evaluation evaluate(const TestProblem& problem, const Boundaries& bounds);

}  // namespace sprt_exact
