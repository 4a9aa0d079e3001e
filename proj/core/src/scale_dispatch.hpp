#pragma once

// Glue between the public ScaleMatrix and the scalar-templated exit algebra.
// `with_scale` hands the callback a scale provider with
//   MatrixT<Real> w(const Real& x)
//   MatrixT<Real> weighted_integral(const Real& x, double c)
// and a Real tag; the Erlang series picks the scalar from the digit budget of
// the largest argument, the inversion route widens on demand.

#include "erlang_series.hpp"
#include "inversion.hpp"
#include "precision.hpp"
#include "sprt_exact/scale.hpp"

#include <initializer_list>
#include <numbers>

namespace sprt_exact::detail {

inline ErlangParams erlang_params(const MapModel& m) {
  const auto& e = m.ph().erlang_shape();
  return ErlangParams{e->phases, e->rate, m.theta(), m.d(), m.z()};
}

inline MapParams map_params(const MapModel& m) {
  return MapParams{m.ph().generator(), m.ph().exit_rates(), m.ph().initial(), m.theta(), m.d(), m.z()};
}

/// Decimal digits lost when the series terms for W (and the listed weighted
/// integrals) are summed up to x_max and W(x_max) is then solved against.
inline double erlang_loss_digits(const ErlangParams& p, double x_max, std::initializer_list<double> cs,
                                 bool solve) {
  double lg = series_log_magnitude(p, x_max, -1.0);
  for (double c : cs) lg = std::max(lg, series_log_magnitude(p, x_max, c));
  double loss = lg / std::numbers::ln10;
  if (solve) loss += growth_bound(p) * x_max / std::numbers::ln10;
  return loss;
}

struct ScaleAccess {
  static const TransformInverter& inverter(const ScaleMatrix& s) { return *s.inverter_; }
};

template <class Real>
class InversionScale {
 public:
  InversionScale(const TransformInverter& inv, double d) : inv_(inv), d_(d) {}
  const Real& d() const { return d_; }
  bool has_tilt() const { return false; }
  MatrixT<Real> w(const Real& x) const { return inv_.invert<Real>(x, 0.0, 0); }
  MatrixT<Real> weighted_integral(const Real& x, double c) const { return inv_.invert<Real>(x, c, 1); }
  double work_eps() const { return inv_.tolerance<Real>(); }
  bool exact() const { return false; }

 private:
  const TransformInverter& inv_;
  Real d_;
};

/// `tilt` > 0 declares d = -n log(lambda / (lambda + tilt)); see ErlangParams.
template <class F>
decltype(auto) with_scale(const ScaleMatrix& sm, double x_max, std::initializer_list<double> cs, double tilt,
                          F&& f) {
  if (sm.method() == ScaleMethod::ErlangClosedForm) {
    ErlangParams p = erlang_params(sm.model());
    p.tilt = tilt;
    return with_precision(erlang_loss_digits(p, x_max, cs, true), [&](auto tag) {
      using Real = decltype(tag);
      return f(ErlangSeries<Real>(p), tag);
    });
  }
  // Inversion: start in double and widen when the exit solve cannot be
  // resolved at the precision reached.
  const TransformInverter& inv = ScaleAccess::inverter(sm);
  const double d = sm.model().d();
  const auto retry = [](const Error& e) {
    return e.kind() == ErrorKind::IllConditionedSolve || e.kind() == ErrorKind::ScaleEvaluationFailed ||
           e.kind() == ErrorKind::InversionDiverged;
  };
  try {
    return f(InversionScale<double>(inv, d), double{});
  } catch (const Error& e) {
    if (!retry(e)) throw;
  }
  try {
    return f(InversionScale<Real50>(inv, d), Real50{});
  } catch (const Error& e) {
    if (!retry(e)) throw;
  }
  return f(InversionScale<Real100>(inv, d), Real100{});
}

}  // namespace sprt_exact::detail
