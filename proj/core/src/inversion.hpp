#pragma once

// Numerical inversion of s -> F(s - c)^{-1} / s^p for the MAP
// F(s) = T + theta s I + z t nu e^{-ds}.
//
// The leading terms of the expansion of F(s-c)^{-1} in powers of 1/s are
// removed before inverting; each of them is a shifted power e^{-dks} / s^{j+1}
// whose original is (x - dk)_+^j / j!. What is left is smooth enough at the
// kinks x = kd for the Euler (Abate-Whitt) scheme on the Bromwich line
// Re s = sigma, with sigma the rightmost pole.
//
// The scheme runs in one of three scalar tiers. Double precision reaches
// about 1e-10; the multiprecision tiers subtract more terms and use more
// Euler nodes for about 1e-15 (Real50) and 1e-28 (Real100) at moderate x.

#include "precision.hpp"
#include "sprt_exact/phasetype.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace sprt_exact::detail {

struct MapParams {
  Matrix T;
  Vector t;
  RowVector nu;
  double theta;
  double d;
  double z;
};

/// Solves T - theta L + z t nu e^{dL} = 0 for the generator L of the
/// downward first-passage process by the monotone fixed point
/// L <- (T + z t nu e^{dL}) / theta started at T / theta.
Matrix first_passage_generator(const MapParams& p);

/// Real part of the rightmost zero of det F(s); the zeros in the right half
/// plane are the eigenvalues of -L.
double rightmost_pole(const MapParams& p);

class TransformInverter {
 public:
  TransformInverter(MapParams p, double rel_tol);

  double abscissa() const { return sigma_; }
  double rel_tol() const { return rel_tol_; }

  /// W(x).
  Matrix w(double x) const { return invert<double>(x, 0.0, 0); }

  /// int_0^x e^{c y} W(y) dy, inverted from F(s - c)^{-1} / s.
  Matrix weighted_integral(double x, double c) const { return invert<double>(x, c, 1); }

  /// Same in a wider scalar (double, Real50 or Real100).
  template <class Real>
  MatrixT<Real> invert(const Real& x, double c, int p) const;

  /// Relative accuracy a tier is held to: rel_tol for double, fixed for the
  /// multiprecision tiers.
  template <class Real>
  double tolerance() const;

  MapParams p_;
  double rel_tol_;
  double sigma_;
};

}  // namespace sprt_exact::detail
