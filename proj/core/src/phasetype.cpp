#include "sprt_exact/phasetype.hpp"

#include "sprt_exact/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace sprt_exact {
namespace {

std::optional<ErlangShape> detect_erlang(const RowVector& nu, const Matrix& T) {
  const Eigen::Index n = T.rows();
  if (nu(0) != 1.0) return std::nullopt;
  const double rate = -T(0, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double expected = (i == j) ? -rate : (j == i + 1 ? rate : 0.0);
      if (T(i, j) != expected) return std::nullopt;
    }
  }
  return ErlangShape{static_cast<int>(n), rate};
}

}  // namespace

PhaseTypeDist PhaseTypeDist::validate(RowVector nu, Matrix T) {
  const Eigen::Index n = nu.size();
  if (n == 0 || T.rows() != n || T.cols() != n) {
    std::ostringstream os;
    os << "nu has " << n << " entries but T is " << T.rows() << "x" << T.cols();
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  if (!nu.allFinite() || !T.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "non-finite entry in nu or T");
  }
  if ((nu.array() < 0.0).any() || std::abs(nu.sum() - 1.0) > kPhaseTolerance) {
    std::ostringstream os;
    os << "nu must be a probability vector (sum = " << nu.sum() << ")";
    throw Error(ErrorKind::NonStochasticInitial, os.str());
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(T(i, i) < 0.0)) {
      throw Error(ErrorKind::NotSubgenerator, "T(" + std::to_string(i) + "," + std::to_string(i) +
                                                  ") must be negative");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && T(i, j) < 0.0) {
        throw Error(ErrorKind::NotSubgenerator, "off-diagonal T(" + std::to_string(i) + "," +
                                                    std::to_string(j) + ") is negative");
      }
    }
    if (T.row(i).sum() > kPhaseTolerance) {
      throw Error(ErrorKind::NotSubgenerator, "row " + std::to_string(i) + " of T has positive sum");
    }
  }
  Vector t = -(T * Vector::Ones(n));
  t = t.cwiseMax(0.0);
  if (!(t.array() > 0.0).any()) {
    throw Error(ErrorKind::SingularGenerator, "no phase leads to absorption");
  }
  Eigen::FullPivLU<Matrix> lu(T);
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    throw Error(ErrorKind::SingularGenerator, "T is singular; absorption is not certain");
  }
  auto erl = detect_erlang(nu, T);
  return PhaseTypeDist(std::move(nu), std::move(T), std::move(t), erl);
}

PhaseTypeDist erlang(int phases, double rate) {
  if (phases < 1) throw Error(ErrorKind::InvalidArgument, "Erlang needs at least one phase");
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorKind::InvalidArgument, "Erlang rate must be positive");
  }
  RowVector nu = RowVector::Zero(phases);
  nu(0) = 1.0;
  Matrix T = Matrix::Zero(phases, phases);
  for (int i = 0; i < phases; ++i) {
    T(i, i) = -rate;
    if (i + 1 < phases) T(i, i + 1) = rate;
  }
  return PhaseTypeDist::validate(std::move(nu), std::move(T));
}

PhaseTypeDist hyperexponential(const std::vector<double>& rates, const std::vector<double>& weights) {
  if (rates.size() != weights.size() || rates.empty()) {
    throw Error(ErrorKind::InvalidArgument, "rates and weights must have the same nonzero length");
  }
  const auto n = static_cast<Eigen::Index>(rates.size());
  RowVector nu(n);
  Matrix T = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    nu(i) = weights[static_cast<std::size_t>(i)];
    T(i, i) = -rates[static_cast<std::size_t>(i)];
  }
  return PhaseTypeDist::validate(std::move(nu), std::move(T));
}

double density(const PhaseTypeDist& ph, double x) {
  if (x < 0.0) throw Error(ErrorKind::InvalidArgument, "density needs x >= 0");
  if (const auto& e = ph.erlang_shape()) {
    const int n = e->phases;
    const double l = e->rate;
    if (x == 0.0) return n == 1 ? l : 0.0;
    return std::exp(n * std::log(l) + (n - 1) * std::log(x) - l * x - std::lgamma(double(n)));
  }
  const Matrix e = (ph.generator() * x).exp();
  return std::max(0.0, (ph.initial() * e * ph.exit_rates())(0));
}

double lst(const PhaseTypeDist& ph, double theta) {
  if (theta < 0.0) throw Error(ErrorKind::InvalidArgument, "lst needs theta >= 0");
  const auto n = ph.phases();
  const Matrix A = theta * Matrix::Identity(n, n) - ph.generator();
  const Vector v = A.partialPivLu().solve(ph.exit_rates());
  return ph.initial() * v;
}

double mean(const PhaseTypeDist& ph) {
  const auto n = ph.phases();
  const Vector v = (-ph.generator()).partialPivLu().solve(Vector::Ones(n));
  return ph.initial() * v;
}

TiltResult tilt(const PhaseTypeDist& ph0, double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorKind::InvalidArgument, "tilt parameter theta must be positive");
  }
  const auto n = ph0.phases();
  const Matrix A = theta * Matrix::Identity(n, n) - ph0.generator();
  Eigen::FullPivLU<Matrix> lu(A);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::SingularGenerator, "theta I - T0 is singular");
  }
  const Vector delta = lu.solve(ph0.exit_rates());
  const double g0 = ph0.initial() * delta;
  if (!(g0 > 0.0 && g0 < 1.0) || (delta.array() <= 0.0).any() || (delta.array() >= 1.0).any()) {
    throw Error(ErrorKind::SingularGenerator, "tilt produced entries outside (0,1); input is corrupt");
  }
  const double d = -std::log(g0);

  if (const auto& e = ph0.erlang_shape()) {
    return TiltResult{erlang(e->phases, e->rate + theta), delta, g0, d};
  }

  const Vector inv = delta.cwiseInverse();
  Matrix T1 = inv.asDiagonal() * ph0.generator() * delta.asDiagonal();
  T1.diagonal().array() -= theta;
  RowVector nu1 = ph0.initial().cwiseProduct(delta.transpose()) / g0;
  nu1 /= nu1.sum();
  // Rows of D^{-1} T0 D - theta I sum to -t1 exactly in exact arithmetic; the
  // clamp only removes rounding noise in the off-diagonal sign pattern.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && T1(i, j) < 0.0) T1(i, j) = 0.0;
    }
  }
  return TiltResult{PhaseTypeDist::validate(std::move(nu1), std::move(T1)), delta, g0, d};
}

PhaseTypeSampler::PhaseTypeSampler(const PhaseTypeDist& ph) : erlang_(ph.erlang_shape()) {
  const auto n = ph.phases();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += ph.initial()(i);
    initial_cdf_.push_back(acc);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double rate = -ph.generator()(i, i);
    hold_rate_.push_back(rate);
    std::vector<double> row;
    double c = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) c += ph.generator()(i, j) / rate;
      row.push_back(c);
    }
    jump_cdf_.push_back(std::move(row));
  }
}

double PhaseTypeSampler::operator()(RandomStream& rng) const {
  if (erlang_) {
    std::exponential_distribution<double> expo(erlang_->rate);
    double s = 0.0;
    for (int k = 0; k < erlang_->phases; ++k) s += expo(rng);
    return s;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto pick = [&](const std::vector<double>& cdf, double u) -> std::size_t {
    std::size_t j = 0;
    while (j < cdf.size() && u >= cdf[j]) ++j;
    return j;
  };
  std::size_t phase = pick(initial_cdf_, unif(rng));
  if (phase >= initial_cdf_.size()) phase = initial_cdf_.size() - 1;
  double total = 0.0;
  for (;;) {
    std::exponential_distribution<double> expo(hold_rate_[phase]);
    total += expo(rng);
    const std::size_t next = pick(jump_cdf_[phase], unif(rng));
    if (next >= jump_cdf_[phase].size()) return total;  // absorbed
    phase = next;
  }
}

double sample(const PhaseTypeDist& ph, RandomStream& rng) { return PhaseTypeSampler(ph)(rng); }

}  // namespace sprt_exact
