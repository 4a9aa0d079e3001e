#pragma once

#include "sprt_exact/phasetype.hpp"

#include <complex>
#include <memory>
#include <optional>

namespace sprt_exact {

/// MAP with PH interarrival times, slope theta, deterministic downward jumps
/// of size d and survival probability z per jump.
class MapModel {
 public:
  /// Throws InvalidArgument unless theta > 0, d > 0 and 0 < z <= 1.
  static MapModel make(PhaseTypeDist ph, double theta, double d, double z = 1.0);

  const PhaseTypeDist& ph() const { return ph_; }
  double theta() const { return theta_; }
  double d() const { return d_; }
  double z() const { return z_; }

 private:
  MapModel(PhaseTypeDist ph, double theta, double d, double z)
      : ph_(std::move(ph)), theta_(theta), d_(d), z_(z) {}

  PhaseTypeDist ph_;
  double theta_;
  double d_;
  double z_;
};

/// F^z(s) = T + theta s I + z t nu e^{-ds}.
Matrix f_matrix(const MapModel& model, double s);
Eigen::MatrixXcd f_matrix(const MapModel& model, std::complex<double> s);

enum class ScaleMethod { ErlangClosedForm, TransformInversion };

namespace detail {
class TransformInverter;
struct ScaleAccess;
}

/// Evaluator of W^z(x), its antiderivative and Z^z(x) for one model.
/// Canonical Erlang models use the closed-form series, everything else the
/// numerical transform inversion.
class ScaleMatrix {
 public:
  explicit ScaleMatrix(MapModel model, std::optional<ScaleMethod> method = std::nullopt,
                       double rel_tol = 1e-8);

  const MapModel& model() const { return model_; }
  ScaleMethod method() const { return method_; }
  double rel_tol() const { return rel_tol_; }

  Matrix w(double x) const;
  /// int_0^x W(y) dy.
  Matrix integral(double x) const { return weighted_integral(x, 0.0); }
  /// int_0^x e^{c y} W(y) dy, c >= 0.
  Matrix weighted_integral(double x, double c) const;
  /// I - int_0^x W(y) dy F^z(0).
  Matrix z_matrix(double x) const;

  /// Exponential growth rate of W: real part of the rightmost zero of det F^z.
  double growth_rate() const;

 private:
  friend struct detail::ScaleAccess;

  MapModel model_;
  ScaleMethod method_;
  double rel_tol_;
  std::shared_ptr<const detail::TransformInverter> inverter_;
};

/// Closed-form W^z for Erlang(n, lambda) interarrivals and slope theta.
/// Terms beyond floor(x/d) > 1e5 or beyond 100 significant digits of
/// cancellation raise SeriesOverflow.
Matrix erlang_w(double lambda, double d, int n, double z, double x, double theta = 1.0);

/// int_0^x erlang_w(y) dy from the closed antiderivative of each series term.
Matrix erlang_w_integral(double lambda, double d, int n, double z, double x, double theta = 1.0);

/// I - int_0^x W^z(y) dy F^z(0).
Matrix z_matrix(const MapModel& model, double x);

/// W^z(x) by numerical inversion of F^z(s)^{-1}, for any PH model.
/// Throws InversionDiverged or SingularTransform.
Matrix general_w(const MapModel& model, double x, double rel_tol = 1e-8);

/// e^x D^{-1} W0(x) D with D = diag(delta): the H1 scale function obtained
/// from the H0 one.
Matrix tilted_w(const ScaleMatrix& w0, const Vector& delta, double x);

/// Generator L of the downward first-passage process, solving
/// T - theta L + z t nu e^{dL} = 0.
Matrix first_passage_generator(const MapModel& model);

}  // namespace sprt_exact
