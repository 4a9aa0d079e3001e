#pragma once

// Closed-form scale function of the MAP with Erlang(n, lambda) interarrival
// times, slope theta, deterministic jumps d and survival probability z:
//
//   W(x)_ij = theta^{-1} sum_{k = 1{i>j}}^{floor(x/d)} z^k g(l (x - d k), k n + j - i),
//   g(y, m) = (-y)^m / m! e^y,  l = lambda / theta.
//
// The antiderivative uses  int_0^Y g(v, m) dv = sum_{r<=m} g(Y, r) - 1.

#include "precision.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace sprt_exact::detail {

/// Largest floor(x/d) accepted by the series.
inline constexpr double kMaxSeriesTerms = 1e5;

struct ErlangParams {
  int n;
  double lambda;  // physical rate
  double theta;
  double d;
  double z;
  // When positive, d is the tilt jump -n log(lambda / (lambda + tilt)) and is
  // recomputed in the working scalar together with delta, so that identities
  // relying on e^{-d} = G0(tilt) hold to working precision.
  double tilt = 0.0;

  double scaled_rate() const { return lambda / theta; }
};

inline long checked_terms(double k) {
  if (!(k <= kMaxSeriesTerms)) {
    throw Error(ErrorKind::SeriesOverflow,
                "floor(x/d) exceeds 1e5 terms; the series is meaningless in this regime");
  }
  return static_cast<long>(k);
}

inline long series_terms(const ErlangParams& p, double x) { return checked_terms(std::floor(x / p.d)); }

/// Upper bound on the real part of every zero of det F^z(s); W grows no
/// faster than e^{sigma0 x}.
inline double growth_bound(const ErlangParams& p) {
  const double l = p.scaled_rate();
  const double zn = std::pow(p.z, 1.0 / p.n);
  auto f = [&](double s) { return s - l - l * zn * std::exp(-s * p.d / p.n); };
  double lo = l;
  double hi = 2.0 * l + 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return hi;
}

/// Natural log of the largest term met when summing W(x) (c < 0) or
/// int_0^x e^{c y} W(y) dy (c >= 0).
inline double series_log_magnitude(const ErlangParams& p, double x, double c) {
  const long K = series_terms(p, x);
  const double l = p.scaled_rate();
  const int n = p.n;
  double best = 0.0;
  auto log_term = [](double y, double m) {
    if (y <= 0.0) return m == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return y + m * std::log(y) - std::lgamma(m + 1.0);
  };
  for (long k = 0; k <= K; ++k) {
    const double m_lo = std::max(0.0, double(k * n - (n - 1)));
    const double m_hi = double(k * n + n - 1);
    const double zk = k * std::log(p.z);
    if (c < 0.0) {
      const double u = l * std::max(0.0, x - p.d * k);
      const double m = std::clamp(std::floor(u), m_lo, m_hi);
      best = std::max({best, zk + log_term(u, m), zk + log_term(u, std::min(m + 1.0, m_hi))});
    } else {
      const double mu = l + c;
      const double y = mu * std::max(0.0, x - p.d * k);
      const double coef = zk + c * p.d * k - std::log(mu) + m_lo * std::log(l / mu);
      const double r = std::clamp(std::floor(y), 0.0, m_hi);
      best = std::max({best, coef + log_term(y, r), coef + log_term(y, std::min(r + 1.0, m_hi))});
    }
  }
  return best;
}

template <class Real>
class ErlangSeries {
 public:
  explicit ErlangSeries(const ErlangParams& p)
      : p_(p), lam_(Real(p.lambda) / Real(p.theta)), d_(p.d), z_(p.z), inv_theta_(Real(1) / Real(p.theta)) {
    using std::log;
    if (p.tilt > 0.0) {
      rho_ = Real(p.lambda) / (Real(p.lambda) + Real(p.tilt));
      d_ = -Real(p.n) * log(rho_);
    }
  }

  const Real& d() const { return d_; }
  bool has_tilt() const { return p_.tilt > 0.0; }

  /// (rho^n, ..., rho) for a tilted model.
  VectorT<Real> tilt_delta() const {
    VectorT<Real> out(p_.n);
    for (int i = 0; i < p_.n; ++i) out(i) = pow_int(rho_, p_.n - i);
    return out;
  }

  int phases() const { return p_.n; }
  double work_eps() const { return to_double(Real(std::numeric_limits<Real>::epsilon())); }
  bool exact() const { return true; }

  MatrixT<Real> w(const Real& x) const {
    const int n = p_.n;
    MatrixT<Real> out = MatrixT<Real>::Zero(n, n);
    if (x < 0) return out;
    const long K = terms(x);
    std::vector<Real> g(static_cast<std::size_t>(2 * n));
    for (long k = 0; k <= K; ++k) {
      Real u = lam_ * (x - d_ * Real(k));
      if (u < 0) u = 0;
      const long m_lo = std::max(0L, k * n - (n - 1));
      const long m_hi = k * n + n - 1;
      fill_g(u, m_lo, m_hi, g);
      const Real zk = pow_int(z_, k);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (k == 0 && i > j) continue;
          const long m = k * n + j - i;
          out(i, j) += zk * g[static_cast<std::size_t>(m - m_lo)];
        }
      }
    }
    return out * inv_theta_;
  }

  /// int_0^x e^{c y} W(y) dy for c >= 0.
  MatrixT<Real> weighted_integral(const Real& x, double c) const {
    const int n = p_.n;
    MatrixT<Real> out = MatrixT<Real>::Zero(n, n);
    if (x <= 0) return out;
    const long K = terms(x);
    const Real cc(c);
    const Real mu = lam_ + cc;
    const Real ratio = lam_ / mu;
    std::vector<Real> s_minus_one(static_cast<std::size_t>(2 * n));
    for (long k = 0; k <= K; ++k) {
      Real y = mu * (x - d_ * Real(k));
      if (y < 0) y = 0;
      const long m_lo = std::max(0L, k * n - (n - 1));
      const long m_hi = k * n + n - 1;
      fill_partial_exp_minus_one(y, m_lo, m_hi, s_minus_one);
      const Real coef = pow_int(z_, k) * exp(cc * d_ * Real(k)) / mu;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (k == 0 && i > j) continue;
          const long m = k * n + j - i;
          out(i, j) += coef * pow_int(ratio, m) * s_minus_one[static_cast<std::size_t>(m - m_lo)];
        }
      }
    }
    return out * inv_theta_;
  }

 private:
  long terms(const Real& x) const {
    using std::floor;
    return checked_terms(to_double(Real(floor(x / d_))));
  }

  static Real pow_int(const Real& base, long e) {
    Real r = 1;
    Real b = base;
    for (long k = e; k > 0; k >>= 1) {
      if (k & 1) r *= b;
      b *= b;
    }
    return r;
  }

  // g(u, m) for m in [m_lo, m_hi].
  static void fill_g(const Real& u, long m_lo, long m_hi, std::vector<Real>& out) {
    using std::exp;
    using std::log;
    if (u == 0) {
      for (long m = m_lo; m <= m_hi; ++m) out[static_cast<std::size_t>(m - m_lo)] = (m == 0) ? 1 : 0;
      return;
    }
    const Real lg = boost::math::lgamma(Real(m_lo + 1));
    Real g = exp(u + Real(m_lo) * log(u) - lg);
    if (m_lo % 2 != 0) g = -g;
    for (long m = m_lo; m <= m_hi; ++m) {
      out[static_cast<std::size_t>(m - m_lo)] = g;
      g *= -u / Real(m + 1);
    }
  }

  // sum_{r<=m} g(y, r) - 1 for m in [m_lo, m_hi].
  static void fill_partial_exp_minus_one(const Real& y, long m_lo, long m_hi, std::vector<Real>& out) {
    using std::exp;
    using std::abs;
    if (y == 0) {
      for (long m = m_lo; m <= m_hi; ++m) out[static_cast<std::size_t>(m - m_lo)] = 0;
      return;
    }
    const Real ey = exp(y);
    if (y <= 1) {
      // -e^y sum_{r>m} (-y)^r / r!, free of the 1 - 1 cancellation for small y.
      const Real eps = std::numeric_limits<Real>::epsilon();
      for (long m = m_lo; m <= m_hi; ++m) {
        Real term = 1;
        for (long r = 1; r <= m + 1; ++r) term *= -y / Real(r);
        Real tail = 0;
        for (long r = m + 1;; ++r) {
          tail += term;
          term *= -y / Real(r + 1);
          if (abs(term) <= eps * abs(tail)) break;
        }
        out[static_cast<std::size_t>(m - m_lo)] = -ey * tail;
      }
      return;
    }
    Real term = ey;  // g(y, 0)
    Real partial = 0;
    for (long r = 0; r <= m_hi; ++r) {
      partial += term;
      if (r >= m_lo) out[static_cast<std::size_t>(r - m_lo)] = partial - 1;
      term *= -y / Real(r + 1);
    }
  }

  ErlangParams p_;
  Real lam_;
  Real d_;
  Real z_;
  Real inv_theta_;
  Real rho_ = 0;
};

}  // namespace sprt_exact::detail
