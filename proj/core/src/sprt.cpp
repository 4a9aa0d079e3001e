#include "sprt_exact/sprt.hpp"

#include "scale_dispatch.hpp"
#include "sprt_exact/error.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace sprt_exact {
namespace {

using detail::MatrixT;
using detail::RowVectorT;
using detail::VectorT;

// Largest tolerated (working precision / rcond) in the solve against W(x2).
constexpr double kSolveErrorCap = 1e-4;
// Relative agreement demanded between the two E1 N routes.
constexpr double kRouteTolExact = 1e-8;
constexpr double kRouteTolInversion = 1e-5;
// Inversion tolerance for the scale functions of a test problem; tighter than
// the general_w default because the exit solve amplifies it by 1/rcond.
constexpr double kProblemInversionTol = 1e-9;

void check_bounds(const Boundaries& bounds) {
  if (!std::isfinite(bounds.a) || !std::isfinite(bounds.b) || bounds.a > 0.0 || bounds.b < 0.0) {
    std::ostringstream os;
    os << "boundaries need a <= 0 <= b, got a = " << bounds.a << ", b = " << bounds.b;
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
}

void check_target(const ErrorPair& target) {
  if (!(target.alpha0 > 0.0 && target.alpha1 > 0.0)) {
    throw Error(ErrorKind::DegenerateTargets, "target errors must be positive");
  }
  if (!(target.alpha0 + target.alpha1 < 1.0)) {
    throw Error(ErrorKind::DegenerateTargets, "target errors need alpha0 + alpha1 < 1");
  }
}

double probability(double p, const char* what) {
  if (!std::isfinite(p) || p < -1e-9 || p > 1.0 + 1e-9) {
    std::ostringstream os;
    os << what << " evaluated to " << p << ", outside [0,1]";
    throw Error(ErrorKind::ScaleEvaluationFailed, os.str());
  }
  return std::clamp(p, 0.0, 1.0);
}

template <class Real>
struct Data {
  RowVectorT<Real> nu;
  VectorT<Real> t;
  VectorT<Real> delta;
  VectorT<Real> ones;
};

template <class Real, class Scale>
Data<Real> data_of(const Scale& s, const PhaseTypeDist& ph, const Vector& delta) {
  using detail::cast_to;
  const auto n = ph.phases();
  Data<Real> out{cast_to<Real>(ph.initial()), cast_to<Real>(ph.exit_rates()), cast_to<Real>(delta),
                 VectorT<Real>::Ones(n)};
  if constexpr (requires { s.tilt_delta(); }) {
    if (s.has_tilt()) out.delta = s.tilt_delta();
  }
  return out;
}

// Arguments of the exit identities, formed in the working scalar so that
// x2 = x1 + b + d holds exactly there.
template <class Real>
struct Point {
  Real x1;
  Real x2;
  Real b;
  Real d;
};

template <class Real, class Scale>
Point<Real> point_of(const Scale& s, const Boundaries& bd) {
  const Real d = s.d();
  const Real x1 = -Real(bd.a);
  const Real b = Real(bd.b);
  return Point<Real>{x1, x1 + b + d, b, d};
}

double x_max(const TestProblem& p, const Boundaries& bd) { return -bd.a + bd.b + p.d(); }

// nu W(x1) W(x2)^{-1} by a transposed solve.
template <class Real, class Scale>
RowVectorT<Real> exit_weights(const Scale& s, const RowVectorT<Real>& nu, const Point<Real>& g) {
  const MatrixT<Real> w1 = s.w(g.x1);
  const MatrixT<Real> w2t = s.w(g.x2).transpose();
  Eigen::PartialPivLU<MatrixT<Real>> lu(w2t);
  // Exact 1-norm condition; the phase count is small enough for the inverse.
  const auto norm1 = [](const MatrixT<Real>& m) {
    return detail::to_double(Real(m.cwiseAbs().colwise().sum().maxCoeff()));
  };
  const double rc = 1.0 / (norm1(w2t) * norm1(lu.inverse()));
  if (!(rc > 0.0) || s.work_eps() / rc > kSolveErrorCap) {
    std::ostringstream os;
    os << "W(" << detail::to_double(g.x2) << ") has reciprocal condition " << rc
       << "; the exit probabilities are not resolvable";
    throw Error(ErrorKind::IllConditionedSolve, os.str());
  }
  const VectorT<Real> v = lu.solve((nu * w1).transpose());
  return v.transpose();
}

template <class Real>
ErrorPair errors_from(const RowVectorT<Real>& v, const Data<Real>& data, const Point<Real>& g) {
  using std::exp;
  const Real a0 = Real(1) - v.dot(data.ones.transpose());
  const Real a1 = exp(-g.b) * v.dot(data.delta.transpose());
  return ErrorPair{probability(detail::to_double(a0), "alpha0"), probability(detail::to_double(a1), "alpha1")};
}

// E N for the model the scale belongs to.
template <class Real, class Scale>
Real expected_n_direct(const Scale& s, const Data<Real>& data, const RowVectorT<Real>& v, const Point<Real>& g) {
  const MatrixT<Real> i1 = s.weighted_integral(g.x1, 0.0);
  const MatrixT<Real> i2 = s.weighted_integral(g.x2, 0.0);
  const Real head = (data.nu * i1 * data.t)(0);
  const Real tail = (v * i2 * data.t)(0) + v.dot(data.ones.transpose());
  return tail - head;
}

// E1 N through W1 = e^x D^{-1} W0 D, i.e. with int e^y W0(y) dy. The two
// terms cancel heavily for large boundaries; the working scalar absorbs it.
template <class Real, class Scale>
Real expected_n_h1_from_h0(const Scale& s, const Data<Real>& data, const RowVectorT<Real>& v,
                           const Point<Real>& g) {
  using std::exp;
  const MatrixT<Real> i1 = s.weighted_integral(g.x1, 1.0);
  const MatrixT<Real> i2 = s.weighted_integral(g.x2, 1.0);
  const Real head = exp(g.d) * (data.nu * i1 * data.t)(0);
  const Real tail = exp(-g.b) * ((v * i2 * data.t)(0) + v.dot(data.delta.transpose()));
  return tail - head;
}

double checked_n(double n, const char* what) {
  if (!std::isfinite(n) || n < 1.0 - 1e-6) {
    std::ostringstream os;
    os << what << " evaluated to " << n << " (< 1)";
    throw Error(ErrorKind::ScaleEvaluationFailed, os.str());
  }
  return std::max(1.0, n);
}

// E N under the law the scale's model describes (ph0 with scale0, ph1 with scale1).
double en_direct(const ScaleMatrix& sm, const PhaseTypeDist& ph, const TestProblem& p, const Boundaries& bd) {
  return detail::with_scale(sm, x_max(p, bd), {0.0}, 0.0, [&](const auto& s, auto tag) {
    using Real = decltype(tag);
    const auto data = data_of<Real>(s, ph, p.delta());
    const auto g = point_of<Real>(s, bd);
    const auto v = exit_weights<Real>(s, data.nu, g);
    return detail::to_double(expected_n_direct<Real>(s, data, v, g));
  });
}

double e1n_from_h0(const TestProblem& p, const Boundaries& bd) {
  return detail::with_scale(p.scale0(), x_max(p, bd), {1.0}, p.theta(), [&](const auto& s, auto tag) {
    using Real = decltype(tag);
    const auto data = data_of<Real>(s, p.ph0(), p.delta());
    const auto g = point_of<Real>(s, bd);
    const auto v = exit_weights<Real>(s, data.nu, g);
    return detail::to_double(expected_n_h1_from_h0<Real>(s, data, v, g));
  });
}

double route_tolerance(const ScaleMatrix& s) {
  return s.method() == ScaleMethod::ErlangClosedForm ? kRouteTolExact : kRouteTolInversion;
}

}  // namespace

TestProblem::TestProblem(PhaseTypeDist ph0, double theta, TiltResult t)
    : ph0_(std::move(ph0)),
      theta_(theta),
      tilt_(std::move(t)),
      scale0_(MapModel::make(ph0_, theta_, tilt_.d), std::nullopt, kProblemInversionTol),
      scale1_(MapModel::make(tilt_.tilted, theta_, tilt_.d), std::nullopt, kProblemInversionTol) {}

TestProblem TestProblem::make(PhaseTypeDist ph0, double theta) {
  TiltResult t = tilt(ph0, theta);
  return TestProblem(std::move(ph0), theta, std::move(t));
}

ErrorPair errors(const TestProblem& problem, const Boundaries& bounds) {
  check_bounds(bounds);
  return detail::with_scale(problem.scale0(), x_max(problem, bounds), {}, problem.theta(),
                            [&](const auto& s, auto tag) {
                              using Real = decltype(tag);
                              const auto data = data_of<Real>(s, problem.ph0(), problem.delta());
                              const auto g = point_of<Real>(s, bounds);
                              return errors_from<Real>(exit_weights<Real>(s, data.nu, g), data, g);
                            });
}

WaldBounds wald_bounds(const ErrorPair& target) {
  check_target(target);
  return WaldBounds{std::log(target.alpha1 / (1.0 - target.alpha0)), std::log((1.0 - target.alpha1) / target.alpha0)};
}

BBounds b_bounds(const TestProblem& problem, const ErrorPair& target) {
  check_target(target);
  const double base = std::log((1.0 - target.alpha0) / target.alpha1);
  return BBounds{base + std::log(problem.delta().minCoeff()), base + std::log(problem.delta().maxCoeff())};
}

ExpectedNRoutes expected_n_h1_routes(const TestProblem& problem, const Boundaries& bounds) {
  check_bounds(bounds);
  return ExpectedNRoutes{e1n_from_h0(problem, bounds), en_direct(problem.scale1(), problem.ph1(), problem, bounds)};
}

double expected_n(const TestProblem& problem, const Boundaries& bounds, Hypothesis h) {
  check_bounds(bounds);
  if (h == Hypothesis::H0) return checked_n(en_direct(problem.scale0(), problem.ph0(), problem, bounds), "E0 N");
  const auto r = expected_n_h1_routes(problem, bounds);
  const double tol = std::max(route_tolerance(problem.scale0()), route_tolerance(problem.scale1()));
  if (std::abs(r.from_tilted - r.from_h0_scale) > tol * std::max(1.0, std::abs(r.from_tilted))) {
    std::ostringstream os;
    os << std::setprecision(12) << "E1 N routes disagree: " << r.from_h0_scale << " via the H0 scale function, "
       << r.from_tilted << " via the tilted model";
    throw Error(ErrorKind::ScaleEvaluationFailed, os.str());
  }
  return checked_n(r.from_tilted, "E1 N");
}

double pgf_n(const TestProblem& problem, const Boundaries& bounds, double z, Hypothesis h) {
  check_bounds(bounds);
  if (!(z > 0.0 && z <= 1.0)) throw Error(ErrorKind::InvalidArgument, "pgf argument z must lie in (0,1]");
  const PhaseTypeDist& ph = h == Hypothesis::H0 ? problem.ph0() : problem.ph1();
  const ScaleMatrix& base = h == Hypothesis::H0 ? problem.scale0() : problem.scale1();
  const ScaleMatrix killed(MapModel::make(ph, problem.theta(), problem.d(), z), base.method(), base.rel_tol());
  const double value = detail::with_scale(killed, x_max(problem, bounds), {0.0}, 0.0, [&](const auto& s, auto tag) {
    using Real = decltype(tag);
    const auto data = data_of<Real>(s, ph, problem.delta());
    const auto g = point_of<Real>(s, bounds);
    const auto u = exit_weights<Real>(s, data.nu, g);
    const Real zm1 = Real(z) - Real(1);
    const MatrixT<Real> i1 = s.weighted_integral(g.x1, 0.0);
    const MatrixT<Real> i2 = s.weighted_integral(g.x2, 0.0);
    // nu Z(x1) 1 - u Z(x2) 1 + z u 1 with Z(x) 1 = 1 - (z-1) int_0^x W t.
    const Real u1 = u.dot(data.ones.transpose());
    const Real r = Real(1) - zm1 * (data.nu * i1 * data.t)(0) - (u1 - zm1 * (u * i2 * data.t)(0)) + Real(z) * u1;
    return detail::to_double(r);
  });
  return probability(value, "E z^N");
}

Evaluation evaluate(const TestProblem& problem, const Boundaries& bounds) {
  check_bounds(bounds);
  const bool closed = problem.scale0().method() == ScaleMethod::ErlangClosedForm;
  struct Raw {
    ErrorPair err;
    double e0;
    double e1;
  };
  const Raw raw = detail::with_scale(problem.scale0(), x_max(problem, bounds), {0.0, 1.0}, problem.theta(),
                                     [&](const auto& s, auto tag) {
    using Real = decltype(tag);
    const auto data = data_of<Real>(s, problem.ph0(), problem.delta());
    const auto g = point_of<Real>(s, bounds);
    const auto v = exit_weights<Real>(s, data.nu, g);
    const double e1 = closed ? detail::to_double(expected_n_h1_from_h0<Real>(s, data, v, g)) : 0.0;
    return Raw{errors_from<Real>(v, data, g), detail::to_double(expected_n_direct<Real>(s, data, v, g)), e1};
  });
  const double e1 = closed ? raw.e1 : en_direct(problem.scale1(), problem.ph1(), problem, bounds);
  return Evaluation{raw.err, checked_n(raw.e0, "E0 N"), checked_n(e1, "E1 N")};
}

}  // namespace sprt_exact
