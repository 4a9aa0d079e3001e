#include "support.hpp"

#include <sprt_exact/error.hpp>
#include <sprt_exact/scale.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <random>

using namespace sprt_exact;
using sprt_exact::testing::max_rel_diff;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// mpmath references, tests/oracles/sprt_oracle.py
const Matrix kW25 = mat2(17.228687709809578, -32.977614358321423, -6.7568819653133499, 17.228687709809578);
const Matrix kIntW3 = mat2(25.49394870779046, -44.637389208917236, -8.4829621561109685, 25.49394870779046);
const Matrix kKilledW25 = mat2(15.713927940632832, -32.22111035690811, -4.7226042201600317, 15.713927940632832);

// int_lo^hi f(y) dy for a matrix-valued f, split at the kinks y = k d.
Matrix piecewise_integral(const auto& f, double d, double lo, double hi, int n, double tol = 1e-13) {
  Matrix acc = Matrix::Zero(n, n);
  for (double left = lo; left < hi;) {
    const double right = std::min(hi, (std::floor(left / d + 1e-12) + 1.0) * d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        acc(i, j) += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double y) { return f(y)(i, j); }, left, right, 10, tol);
      }
    }
    left = right;
  }
  return acc;
}

}  // namespace

TEST(FMatrix, ScalarErlang) {
  const auto m = MapModel::make(erlang(1, 1.3), 1.0, 0.4);
  for (double s : {-0.5, 0.0, 2.0}) EXPECT_NEAR(f_matrix(m, s)(0, 0), s - 1.3 + 1.3 * std::exp(-0.4 * s), 1e-15);
}

TEST(FMatrix, RowSumsAtZero) {
  const auto ph = hyperexponential({1.0, 3.0}, {0.4, 0.6});
  EXPECT_LT(f_matrix(MapModel::make(ph, 1.0, 0.5), 0.0).rowwise().sum().cwiseAbs().maxCoeff(), 1e-15);
  const double z = 0.3;
  const Vector got = f_matrix(MapModel::make(ph, 1.0, 0.5, z), 0.0).rowwise().sum();
  EXPECT_LT((got - (z - 1.0) * ph.exit_rates()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FMatrix, ComplexAgreesOnRealAxis) {
  const auto m = MapModel::make(erlang(3, 2.0), 1.5, 0.7, 0.8);
  const Eigen::MatrixXcd c = f_matrix(m, std::complex<double>(1.1, 0.0));
  EXPECT_LT((c.real() - f_matrix(m, 1.1)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(c.imag().cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MapModel, Validation) {
  EXPECT_THROW(MapModel::make(erlang(1, 1.0), 0.0, 1.0), Error);
  EXPECT_THROW(MapModel::make(erlang(1, 1.0), 1.0, -1.0), Error);
  EXPECT_THROW(MapModel::make(erlang(1, 1.0), 1.0, 1.0, 0.0), Error);
  EXPECT_THROW(MapModel::make(erlang(1, 1.0), 1.0, 1.0, 1.5), Error);
}

TEST(ErlangW, IdentityAtZero) {
  for (int n : {1, 2, 3}) {
    for (double lambda : {0.5, 1.0, 2.0}) {
      for (double d : {0.5, 1.0}) {
        EXPECT_LT((erlang_w(lambda, d, n, 1.0, 0.0) - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
}

TEST(ErlangW, SingleTermRange) {
  const double d = std::numbers::ln2;
  for (double x : {0.0, 0.2, 0.6, 0.69}) EXPECT_NEAR(erlang_w(1.0, d, 1, 1.0, x)(0, 0), std::exp(x), 1e-14);
}

TEST(ErlangW, OracleValue) { EXPECT_LT(max_rel_diff(erlang_w(1.0, 1.0, 2, 1.0, 2.5), kW25), 1e-13); }

TEST(ErlangW, ThetaScaling) {
  // Slope theta rescales the rate to lambda / theta and W by 1 / theta.
  const Matrix a = erlang_w(2.0, 0.6, 2, 1.0, 1.9, 2.0);
  const Matrix b = erlang_w(1.0, 0.6, 2, 1.0, 1.9, 1.0) / 2.0;
  EXPECT_LT(max_rel_diff(a, b), 1e-13);
}

TEST(ErlangW, KilledMatchesInversionOracle) {
  EXPECT_LT(max_rel_diff(erlang_w(1.0, 1.0, 2, 0.7, 2.5), kKilledW25), 1e-12);
  const auto m = MapModel::make(erlang(2, 1.0), 1.0, 1.0, 0.7);
  EXPECT_LT(max_rel_diff(general_w(m, 2.5, 1e-9), kKilledW25), 1e-8);
}

TEST(ErlangW, ContinuousInZ) {
  for (double x : {0.5, 2.5, 6.0}) {
    EXPECT_LT(max_rel_diff(erlang_w(1.0, 1.0, 2, 1.0 - 1e-12, x), erlang_w(1.0, 1.0, 2, 1.0, x)), 1e-9);
  }
}

TEST(ErlangW, ContinuousInX) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  for (int i = 0; i < 16; ++i) xs.push_back(u(rng));
  // A jump would be of the size of W itself; the slope is a few times |W|.
  for (double x : xs) {
    const Matrix w = erlang_w(1.0, 1.0, 2, 1.0, x);
    const double jump = (erlang_w(1.0, 1.0, 2, 1.0, x + 1e-8) - w).cwiseAbs().maxCoeff();
    EXPECT_LT(jump, 1e-6 * std::max(1.0, w.cwiseAbs().maxCoeff())) << "x=" << x;
  }
}

TEST(ErlangW, NonsingularOnGrid) {
  for (double x = 0.25; x <= 8.0; x += 0.25) EXPECT_GT(erlang_w(1.0, 1.0, 2, 1.0, x).determinant(), 1e-3) << x;
}

TEST(ErlangW, TransformIdentity) {
  for (int n : {1, 2}) {
    const double lambda = 1.0, d = 1.0;
    const auto m = MapModel::make(erlang(n, lambda), 1.0, d);
    for (double s : {8.0, 12.0}) {
      const double top = 40.0 / (s - lambda);
      const Matrix lt = piecewise_integral(
          [&](double y) -> Matrix { return std::exp(-s * y) * erlang_w(lambda, d, n, 1.0, y); }, d, 0.0, top, n);
      EXPECT_LT((lt - f_matrix(m, s).inverse()).cwiseAbs().maxCoeff(), 1e-6) << "n=" << n << " s=" << s;
    }
  }
}

TEST(ErlangW, SeriesLengthCap) {
  try {
    erlang_w(1.0, 1e-6, 1, 1.0, 1.0);
    FAIL() << "expected SeriesOverflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SeriesOverflow);
  }
}

TEST(ErlangWIntegral, Values) {
  EXPECT_LT(erlang_w_integral(1.0, 1.0, 2, 1.0, 0.0).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(erlang_w_integral(1.0, std::numbers::ln2, 1, 1.0, 0.5)(0, 0), std::exp(0.5) - 1.0, 1e-14);
  EXPECT_LT(max_rel_diff(erlang_w_integral(1.0, 1.0, 2, 1.0, 3.0), kIntW3), 1e-13);
}

TEST(ErlangWIntegral, MatchesQuadrature) {
  const Matrix q = piecewise_integral([](double y) -> Matrix { return erlang_w(1.0, 1.0, 2, 1.0, y); }, 1.0, 0.0, 3.0, 2);
  EXPECT_LT(max_rel_diff(erlang_w_integral(1.0, 1.0, 2, 1.0, 3.0), q), 1e-8);
}

TEST(ScaleMatrix, WeightedIntegralMatchesQuadrature) {
  const ScaleMatrix sm(MapModel::make(erlang(2, 1.0), 1.0, 0.8, 0.9));
  const double c = 0.6, x = 2.7;
  const Matrix q =
      piecewise_integral([&](double y) -> Matrix { return std::exp(c * y) * sm.w(y); }, 0.8, 0.0, x, 2);
  EXPECT_LT(max_rel_diff(sm.weighted_integral(x, c), q), 1e-8);
}

TEST(ZMatrix, Values) {
  const auto m = MapModel::make(erlang(2, 1.0), 1.0, 1.0);
  EXPECT_LT((z_matrix(m, 0.0) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  for (double x : {0.5, 2.0, 4.5}) EXPECT_LT((z_matrix(m, x).rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);

  const auto killed = MapModel::make(erlang(1, 1.0), 1.0, std::numbers::ln2, 0.5);
  EXPECT_NEAR(z_matrix(killed, 0.3)(0, 0), 1.1749294037880016, 1e-14);
}

TEST(GeneralW, MatchesClosedForm) {
  const auto m = MapModel::make(erlang(2, 1.0), 1.0, 1.0);
  EXPECT_LT(max_rel_diff(general_w(m, 2.5, 1e-8), kW25), 1e-7);
  EXPECT_LT(max_rel_diff(general_w(m, 0.5, 1e-8), erlang_w(1.0, 1.0, 2, 1.0, 0.5)), 1e-7);
  const auto e = MapModel::make(erlang(1, 1.0), 1.0, std::numbers::ln2);
  EXPECT_NEAR(general_w(e, 0.5, 1e-8)(0, 0), std::exp(0.5), 1e-7);
}

TEST(GeneralW, ForcedInversionOnErlangScale) {
  const ScaleMatrix sm(MapModel::make(erlang(3, 2.0), 1.0, 0.9), ScaleMethod::TransformInversion);
  const ScaleMatrix closed(MapModel::make(erlang(3, 2.0), 1.0, 0.9));
  for (double x : {0.3, 1.7, 4.0}) {
    EXPECT_LT(max_rel_diff(sm.w(x), closed.w(x)), 1e-7) << x;
    EXPECT_LT(max_rel_diff(sm.integral(x), closed.integral(x)), 1e-7) << x;
  }
}

TEST(GeneralW, ClosedFormNeedsErlang) {
  const auto m = MapModel::make(hyperexponential({1.0, 3.0}, {0.5, 0.5}), 1.0, 0.5);
  EXPECT_THROW(ScaleMatrix(m, ScaleMethod::ErlangClosedForm), Error);
}

TEST(GeneralW, HyperexponentialIsContinuousAndInvertible) {
  const auto m = MapModel::make(hyperexponential({1.0, 3.0}, {0.5, 0.5}), 1.0, 0.5);
  const ScaleMatrix sm(m);
  EXPECT_EQ(sm.method(), ScaleMethod::TransformInversion);
  EXPECT_LT((sm.w(1e-9) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_GT(sm.w(1.0).determinant(), 0.0);
  // The transform of the antiderivative is the antiderivative of the transform.
  const Matrix q = piecewise_integral([&](double y) -> Matrix { return sm.w(y); }, 0.5, 0.0, 1.6, 2, 1e-9);
  EXPECT_LT(max_rel_diff(sm.integral(1.6), q), 1e-7);
}

TEST(FirstPassage, SolvesMatrixEquation) {
  const auto ph = hyperexponential({1.0, 3.0}, {0.5, 0.5});
  const auto m = MapModel::make(ph, 1.0, 0.5, 0.8);
  const Matrix L = first_passage_generator(m);
  const Matrix residual =
      ph.generator() - m.theta() * L + m.z() * ph.exit_rates() * ph.initial() * (m.d() * L).exp();
  EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ScaleMatrix, GrowthRateIsRootOfDeterminant) {
  const auto m = MapModel::make(erlang(2, 1.0), 1.0, 1.0);
  const double s = ScaleMatrix(m).growth_rate();
  EXPECT_NEAR(f_matrix(m, s).determinant(), 0.0, 1e-10);
}

TEST(TiltedW, IdentityAtZero) {
  const auto r = tilt(erlang(2, 1.0), 1.0);
  const ScaleMatrix w0(MapModel::make(erlang(2, 1.0), 1.0, r.d));
  EXPECT_LT((tilted_w(w0, r.delta, 0.0) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TiltedW, MatchesDirectTiltedScale) {
  const auto r = tilt(erlang(2, 1.0), 1.0);
  const ScaleMatrix w0(MapModel::make(erlang(2, 1.0), 1.0, r.d));
  for (double x : {0.1, 0.7, 1.5, 1.7, 3.0, 6.0}) {
    EXPECT_LT(max_rel_diff(tilted_w(w0, r.delta, x), erlang_w(2.0, r.d, 2, 1.0, x)), 1e-9) << x;
  }
}

TEST(TiltedW, Exponential) {
  const auto r = tilt(erlang(1, 1.0), 1.0);
  const ScaleMatrix w0(MapModel::make(erlang(1, 1.0), 1.0, r.d));
  for (double x = 0.0; x <= 5.0; x += 0.25) {
    EXPECT_NEAR(std::exp(x) * w0.w(x)(0, 0) / erlang_w(2.0, r.d, 1, 1.0, x)(0, 0), 1.0, 1e-10) << x;
  }
}
