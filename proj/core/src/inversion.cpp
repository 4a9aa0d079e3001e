#include "inversion.hpp"

#include "sprt_exact/error.hpp"

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <sstream>
#include <utility>

namespace sprt_exact::detail {
namespace {

constexpr int kFixedPointCap = 20000;

}  // namespace

Matrix first_passage_generator(const MapParams& p) {
  const Matrix jump = p.z * p.t * p.nu;
  Matrix L = p.T / p.theta;
  for (int it = 0; it < kFixedPointCap; ++it) {
    Matrix next = (p.T + jump * (p.d * L).exp()) / p.theta;
    const double diff = (next - L).cwiseAbs().maxCoeff();
    L = std::move(next);
    if (diff <= 1e-14 * std::max(1.0, L.cwiseAbs().maxCoeff())) return L;
  }
  throw Error(ErrorKind::InversionDiverged, "first-passage generator iteration did not converge");
}

double rightmost_pole(const MapParams& p) {
  const Matrix L = first_passage_generator(p);
  const Eigen::VectorXcd ev = (-L).eigenvalues();
  double best = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) best = std::max(best, ev(i).real());
  return best;
}

TransformInverter::TransformInverter(MapParams p, double rel_tol)
    : p_(std::move(p)), rel_tol_(rel_tol), sigma_(rightmost_pole(p_)) {
  if (!(rel_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "rel_tol must be positive");
}

namespace {

template <class Real>
struct Tier;

template <>
struct Tier<double> {
  static constexpr int kTerms = 8;
  static constexpr std::array<std::pair<int, int>, 2> kOrders{{{15, 18}, {18, 21}}};
};

template <>
struct Tier<Real50> {
  static constexpr int kTerms = 16;
  static constexpr std::array<std::pair<int, int>, 1> kOrders{{{34, 40}}};
  static constexpr double kTol = 1e-15;
};

template <>
struct Tier<Real100> {
  static constexpr int kTerms = 32;
  static constexpr std::array<std::pair<int, int>, 1> kOrders{{{70, 80}}};
  static constexpr double kTol = 1e-28;
};

template <class Real>
struct Cx {
  Real re;
  Real im;
};

template <class Real>
Cx<Real> operator*(const Cx<Real>& a, const Cx<Real>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

template <class Real>
Cx<Real> operator-(const Cx<Real>& a, const Cx<Real>& b) {
  return {a.re - b.re, a.im - b.im};
}

template <class Real>
Cx<Real> inverse(const Cx<Real>& a) {
  const Real den = a.re * a.re + a.im * a.im;
  return {a.re / den, -a.im / den};
}

template <class Real>
Real modulus(const Cx<Real>& a) {
  using std::sqrt;
  return sqrt(a.re * a.re + a.im * a.im);
}

template <class Real>
Cx<Real> cexp(const Cx<Real>& a) {
  using std::cos;
  using std::exp;
  using std::sin;
  const Real r = exp(a.re);
  return {r * cos(a.im), r * sin(a.im)};
}

// Dense complex matrix, row major.
template <class Real>
struct CMat {
  Eigen::Index n;
  std::vector<Cx<Real>> a;
  Cx<Real>& operator()(Eigen::Index i, Eigen::Index j) { return a[static_cast<std::size_t>(i * n + j)]; }
  const Cx<Real>& operator()(Eigen::Index i, Eigen::Index j) const { return a[static_cast<std::size_t>(i * n + j)]; }
};

template <class Real>
Real norm1(const CMat<Real>& m) {
  Real best = 0;
  for (Eigen::Index j = 0; j < m.n; ++j) {
    Real col = 0;
    for (Eigen::Index i = 0; i < m.n; ++i) col += modulus(m(i, j));
    if (col > best) best = col;
  }
  return best;
}

// Inverse by Gauss-Jordan with partial pivoting; reciprocal 1-norm condition
// number in `rcond`.
template <class Real>
CMat<Real> invert_matrix(CMat<Real> m, double& rcond) {
  const Eigen::Index n = m.n;
  const Real fnorm = norm1(m);
  CMat<Real> inv{n, std::vector<Cx<Real>>(m.a.size(), Cx<Real>{Real(0), Real(0)})};
  for (Eigen::Index i = 0; i < n; ++i) inv(i, i).re = 1;
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index piv = col;
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (modulus(m(r, col)) > modulus(m(piv, col))) piv = r;
    }
    if (modulus(m(piv, col)) == 0) {
      rcond = 0.0;
      return inv;
    }
    if (piv != col) {
      for (Eigen::Index j = 0; j < n; ++j) {
        std::swap(m(piv, j), m(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    const Cx<Real> scale = inverse(m(col, col));
    for (Eigen::Index j = 0; j < n; ++j) {
      m(col, j) = m(col, j) * scale;
      inv(col, j) = inv(col, j) * scale;
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const Cx<Real> f = m(r, col);
      for (Eigen::Index j = 0; j < n; ++j) {
        m(r, j) = m(r, j) - f * m(col, j);
        inv(r, j) = inv(r, j) - f * inv(col, j);
      }
    }
  }
  rcond = to_double(Real(Real(1) / (fnorm * norm1(inv))));
  return inv;
}

// coef[j][k] multiplies (-1)^j e^{-dks} / (theta^{j+1} s^{j+1+p}).
template <class Real>
using Expansion = std::vector<std::vector<MatrixT<Real>>>;

template <class Real>
Expansion<Real> expansion(const MapParams& mp, double c) {
  using std::exp;
  using std::pow;
  const auto n = mp.T.rows();
  const Real theta(mp.theta);
  MatrixT<Real> A = cast_to<Real>(mp.T);
  A.diagonal().array() -= theta * Real(c);
  const MatrixT<Real> B = cast_to<Real>(mp.t) * cast_to<Real>(mp.nu) * Real(Real(mp.z) * exp(Real(mp.d) * Real(c)));
  Expansion<Real> e;
  e.push_back({MatrixT<Real>::Identity(n, n)});
  for (int j = 1; j < Tier<Real>::kTerms; ++j) {
    const auto& prev = e.back();
    std::vector<MatrixT<Real>> next(prev.size() + 1, MatrixT<Real>::Zero(n, n));
    for (std::size_t k = 0; k < prev.size(); ++k) {
      next[k] += prev[k] * A;
      next[k + 1] += prev[k] * B;
    }
    e.push_back(std::move(next));
  }
  for (int j = 0; j < Tier<Real>::kTerms; ++j) {
    const Real scale = Real(j % 2 == 0 ? 1 : -1) / Real(pow(theta, j + 1));
    for (auto& C : e[static_cast<std::size_t>(j)]) C *= scale;
  }
  return e;
}

template <class Real>
MatrixT<Real> subtracted_original(const MapParams& mp, const Real& x, int p, const Expansion<Real>& e) {
  using std::pow;
  const auto n = mp.T.rows();
  MatrixT<Real> out = MatrixT<Real>::Zero(n, n);
  for (int j = 0; j < Tier<Real>::kTerms; ++j) {
    const int power = j + p;
    const Real fact = boost::math::factorial<Real>(static_cast<unsigned>(power));
    const auto& row = e[static_cast<std::size_t>(j)];
    for (std::size_t k = 0; k < row.size(); ++k) {
      const Real y = x - Real(mp.d) * Real(static_cast<double>(k));
      if (y < 0) break;
      out += row[k] * Real(pow(y, power) / fact);
    }
  }
  return out;
}

template <class Real>
MatrixT<Real> euler(const MapParams& mp, double sigma0, const Real& X, double c, int p, const Expansion<Real>& e,
                    int M) {
  using std::exp;
  using std::log;
  using std::pow;
  const auto n = mp.T.rows();
  const Real A = Real(M) * log(Real(10)) / 3;
  const Real two_m = pow(Real(2), -M);
  std::vector<Real> xi(static_cast<std::size_t>(2 * M + 1), Real(1));
  xi[0] = Real(0.5);
  xi[static_cast<std::size_t>(2 * M)] = two_m;
  for (int k = 1; k < M; ++k) {
    xi[static_cast<std::size_t>(2 * M - k)] =
        xi[static_cast<std::size_t>(2 * M - k + 1)] +
        two_m * boost::math::binomial_coefficient<Real>(static_cast<unsigned>(M), static_cast<unsigned>(k));
  }
  const Real sigma = Real(std::max(0.0, sigma0 + c));
  const Real pi = boost::math::constants::pi<Real>();
  const Real theta(mp.theta);
  const Real d(mp.d);
  const MatrixT<Real> T = cast_to<Real>(mp.T);
  const MatrixT<Real> jump = cast_to<Real>(mp.t) * cast_to<Real>(mp.nu) * Real(mp.z);

  MatrixT<Real> acc = MatrixT<Real>::Zero(n, n);
  // weight[j][k]: Euler sum of the real parts of e^{-dks} / s^{j+1+p}; the
  // subtracted terms are applied once after the loop.
  std::vector<std::vector<Real>> weight(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) weight[j].assign(e[j].size(), Real(0));
  CMat<Real> F{n, std::vector<Cx<Real>>(static_cast<std::size_t>(n * n))};
  for (int k = 0; k <= 2 * M; ++k) {
    const Cx<Real> s{A / X + sigma, pi * Real(k) / X};
    const Cx<Real> sc{s.re - Real(c), s.im};
    const Cx<Real> ed = cexp(Cx<Real>{-d * sc.re, -d * sc.im});
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) F(i, j) = Cx<Real>{T(i, j) + jump(i, j) * ed.re, jump(i, j) * ed.im};
      F(i, i).re += theta * sc.re;
      F(i, i).im += theta * sc.im;
    }
    double rc = 0.0;
    const CMat<Real> G = invert_matrix(F, rc);
    if (!(rc > 1e-14)) {
      std::ostringstream os;
      os << "F(s) is singular at the inversion node s = (" << to_double(s.re) << ", " << to_double(s.im) << ")";
      throw Error(ErrorKind::SingularTransform, os.str());
    }
    const Real eta = Real(k % 2 == 0 ? 1 : -1) * xi[static_cast<std::size_t>(k)];
    // Only real parts enter the Euler sum.
    const Cx<Real> inv_s = inverse(s);
    Cx<Real> w{Real(1), Real(0)};
    for (int q = 0; q < p; ++q) w = w * inv_s;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) acc(i, j) += eta * (G(i, j).re * w.re - G(i, j).im * w.im);
    }
    const Cx<Real> shift = cexp(Cx<Real>{-d * s.re, -d * s.im});
    Cx<Real> power = w * inv_s;
    for (std::size_t j = 0; j < e.size(); ++j) {
      Cx<Real> f = power;
      for (auto& wt : weight[j]) {
        wt += eta * f.re;
        f = f * shift;
      }
      power = power * inv_s;
    }
  }
  for (std::size_t j = 0; j < e.size(); ++j) {
    for (std::size_t kk = 0; kk < e[j].size(); ++kk) acc -= e[j][kk] * weight[j][kk];
  }
  return acc * Real(pow(Real(10), Real(M) / 3) / X * exp(sigma * X)) + subtracted_original<Real>(mp, X, p, e);
}

}  // namespace

template <class Real>
double TransformInverter::tolerance() const {
  if constexpr (std::is_same_v<Real, double>) {
    return rel_tol_;
  } else {
    return Tier<Real>::kTol;
  }
}

template <class Real>
MatrixT<Real> TransformInverter::invert(const Real& x, double c, int p) const {
  const auto n = p_.T.rows();
  if (x < 0.0) throw Error(ErrorKind::InvalidArgument, "scale function argument must be >= 0");
  if (x == 0.0) {
    return p == 0 ? MatrixT<Real>(MatrixT<Real>::Identity(n, n) / Real(p_.theta)) : MatrixT<Real>::Zero(n, n);
  }
  const Expansion<Real> e = expansion<Real>(p_, c);
  const double tol = tolerance<Real>();
  double err = 0.0;
  for (const auto& [lo, hi] : Tier<Real>::kOrders) {
    const MatrixT<Real> r_lo = euler<Real>(p_, sigma_, x, c, p, e, lo);
    MatrixT<Real> r_hi = euler<Real>(p_, sigma_, x, c, p, e, hi);
    const double scale = std::max(1.0, to_double(Real(r_hi.cwiseAbs().maxCoeff())));
    err = to_double(Real((r_hi - r_lo).cwiseAbs().maxCoeff())) / scale;
    if (!std::isfinite(err)) break;
    if (err <= tol) return r_hi;
  }
  std::ostringstream os;
  os << "Euler inversion at x = " << to_double(x) << " reached relative error " << err << " > " << tol;
  throw Error(ErrorKind::InversionDiverged, os.str());
}

template MatrixT<double> TransformInverter::invert<double>(const double&, double, int) const;
template MatrixT<Real50> TransformInverter::invert<Real50>(const Real50&, double, int) const;
template MatrixT<Real100> TransformInverter::invert<Real100>(const Real100&, double, int) const;
template double TransformInverter::tolerance<double>() const;
template double TransformInverter::tolerance<Real50>() const;
template double TransformInverter::tolerance<Real100>() const;

}  // namespace sprt_exact::detail
