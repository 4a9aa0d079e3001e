#pragma once

// Scalar tiers for the closed-form scale function. The Erlang series and the
// exit algebra built on it lose roughly (largest series term + log cond W)
// decimal digits; callers estimate that budget and run the whole computation
// in the cheapest scalar that still leaves double-precision accuracy.

#include "sprt_exact/error.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace sprt_exact::detail {

using Real50 = boost::multiprecision::cpp_bin_float_50;
using Real100 = boost::multiprecision::cpp_bin_float_100;

template <class Real>
using MatrixT = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using VectorT = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <class Real>
using RowVectorT = Eigen::Matrix<Real, 1, Eigen::Dynamic>;

/// Digits of headroom kept on top of the predicted loss.
inline constexpr double kGuardDigits = 15.0;

template <class Real>
constexpr int digits10() {
  if constexpr (std::is_same_v<Real, double>) {
    return 16;
  } else {
    return std::numeric_limits<Real>::digits10;
  }
}

template <class Real>
double to_double(const Real& v) {
  if constexpr (std::is_same_v<Real, double>) {
    return v;
  } else {
    return v.template convert_to<double>();
  }
}

template <class Real>
Eigen::MatrixXd to_double(const MatrixT<Real>& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = to_double(m(i, j));
  }
  return out;
}

template <class Real, class Derived>
auto cast_to(const Eigen::MatrixBase<Derived>& m) {
  return m.template cast<Real>().eval();
}

/// Calls `f(Real{})` with the narrowest scalar offering `loss_digits` plus
/// guard digits. Throws SeriesOverflow past the widest tier.
template <class F>
decltype(auto) with_precision(double loss_digits, F&& f) {
  const double need = std::max(0.0, loss_digits) + kGuardDigits;
  if (!std::isfinite(need)) {
    throw Error(ErrorKind::SeriesOverflow, "digit budget is not finite");
  }
  if (need <= 16.0) return f(double{});
  if (need <= 50.0) return f(Real50{});
  if (need <= 100.0) return f(Real100{});
  std::ostringstream os;
  os << "evaluation needs about " << static_cast<int>(need)
     << " significant digits (cancellation in the scale series); the parameters are too close to the"
        " rho -> 1 regime";
  throw Error(ErrorKind::SeriesOverflow, os.str());
}

}  // namespace sprt_exact::detail
