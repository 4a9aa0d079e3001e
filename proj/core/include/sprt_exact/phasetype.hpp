#pragma once

#include <Eigen/Dense>

#include <optional>
#include <random>
#include <vector>

namespace sprt_exact {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Random stream used by every sampler in the library.
using RandomStream = std::mt19937_64;

/// Absolute tolerance used for stochasticity and row-sum checks.
inline constexpr double kPhaseTolerance = 1e-12;

struct ErlangShape {
  int phases;
  double rate;
};

/// Law of the absorption time of a transient Markov chain with initial
/// distribution `nu` and subgenerator `T`. Immutable once validated.
class PhaseTypeDist {
 public:
  /// Checks the invariants and throws `Error` with kind NonStochasticInitial,
  /// NotSubgenerator, SingularGenerator or InvalidArgument (shape mismatch).
  static PhaseTypeDist validate(RowVector nu, Matrix T);

  int phases() const { return static_cast<int>(nu_.size()); }
  const RowVector& initial() const { return nu_; }
  const Matrix& generator() const { return T_; }
  const Vector& exit_rates() const { return t_; }

  /// Set when the representation is the canonical Erlang form
  /// (nu = e1, -rate on the diagonal, rate on the upper diagonal).
  const std::optional<ErlangShape>& erlang_shape() const { return erlang_; }

 private:
  PhaseTypeDist(RowVector nu, Matrix T, Vector t, std::optional<ErlangShape> erlang)
      : nu_(std::move(nu)), T_(std::move(T)), t_(std::move(t)), erlang_(erlang) {}

  RowVector nu_;
  Matrix T_;
  Vector t_;
  std::optional<ErlangShape> erlang_;
};

/// Canonical Erlang(n, rate) representation.
PhaseTypeDist erlang(int phases, double rate);

/// Mixture of exponentials with the given rates and weights.
PhaseTypeDist hyperexponential(const std::vector<double>& rates, const std::vector<double>& weights);

/// nu e^{Tx} t; closed form for Erlang inputs.
double density(const PhaseTypeDist& ph, double x);

/// Laplace-Stieltjes transform nu (theta I - T)^{-1} t.
double lst(const PhaseTypeDist& ph, double theta);

double mean(const PhaseTypeDist& ph);

struct TiltResult {
  PhaseTypeDist tilted;
  Vector delta;     ///< (theta I - T0)^{-1} t0, every entry in (0,1)
  double g0_theta;  ///< lst(ph0, theta)
  double d;         ///< -log g0_theta
};

/// Exponential tilt f1(x) = e^{-theta x} f0(x) / G0(theta). The tilted law is
/// again phase-type with T1 = D^{-1} T0 D - theta I, nu1 = nu0 D / G0,
/// t1 = D^{-1} t0 where D = diag(delta). Erlang(n, l) maps to Erlang(n, l + theta).
TiltResult tilt(const PhaseTypeDist& ph0, double theta);

/// Draws from a phase-type law. Erlang inputs are sampled as a sum of
/// exponentials, everything else by simulating the absorbing chain.
class PhaseTypeSampler {
 public:
  explicit PhaseTypeSampler(const PhaseTypeDist& ph);

  double operator()(RandomStream& rng) const;

 private:
  std::optional<ErlangShape> erlang_;
  std::vector<double> initial_cdf_;
  std::vector<double> hold_rate_;
  // Row i: cumulative probabilities of jumping to phase j; the remaining mass
  // is absorption.
  std::vector<std::vector<double>> jump_cdf_;
};

double sample(const PhaseTypeDist& ph, RandomStream& rng);

}  // namespace sprt_exact
