#include "sprt_exact/scale.hpp"

#include "scale_dispatch.hpp"
#include "sprt_exact/error.hpp"

#include <cmath>

namespace sprt_exact {

MapModel MapModel::make(PhaseTypeDist ph, double theta, double d, double z) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw Error(ErrorKind::InvalidArgument, "theta must be positive");
  if (!(d > 0.0) || !std::isfinite(d)) throw Error(ErrorKind::InvalidArgument, "jump size d must be positive");
  if (!(z > 0.0 && z <= 1.0)) throw Error(ErrorKind::InvalidArgument, "survival probability z must lie in (0,1]");
  return MapModel(std::move(ph), theta, d, z);
}

Matrix f_matrix(const MapModel& model, double s) {
  const auto& ph = model.ph();
  Matrix F = ph.generator() + model.z() * std::exp(-model.d() * s) * ph.exit_rates() * ph.initial();
  F.diagonal().array() += model.theta() * s;
  return F;
}

Eigen::MatrixXcd f_matrix(const MapModel& model, std::complex<double> s) {
  const auto& ph = model.ph();
  Eigen::MatrixXcd F = ph.generator().cast<std::complex<double>>() +
                       (ph.exit_rates() * ph.initial()).cast<std::complex<double>>() *
                           (model.z() * std::exp(-model.d() * s));
  F.diagonal().array() += model.theta() * s;
  return F;
}

ScaleMatrix::ScaleMatrix(MapModel model, std::optional<ScaleMethod> method, double rel_tol)
    : model_(std::move(model)), rel_tol_(rel_tol) {
  const bool erlang = model_.ph().erlang_shape().has_value();
  method_ = method.value_or(erlang ? ScaleMethod::ErlangClosedForm : ScaleMethod::TransformInversion);
  if (method_ == ScaleMethod::ErlangClosedForm && !erlang) {
    throw Error(ErrorKind::InvalidArgument, "closed-form scale function needs a canonical Erlang model");
  }
  if (method_ == ScaleMethod::TransformInversion) {
    inverter_ = std::make_shared<const detail::TransformInverter>(detail::map_params(model_), rel_tol);
  }
}

Matrix ScaleMatrix::w(double x) const {
  if (x < 0.0) throw Error(ErrorKind::InvalidArgument, "scale function argument must be >= 0");
  if (method_ == ScaleMethod::TransformInversion) return inverter_->w(x);
  const auto p = detail::erlang_params(model_);
  return detail::with_precision(detail::erlang_loss_digits(p, x, {}, false), [&](auto tag) {
    return detail::to_double(detail::ErlangSeries<decltype(tag)>(p).w(x));
  });
}

Matrix ScaleMatrix::weighted_integral(double x, double c) const {
  if (x < 0.0) throw Error(ErrorKind::InvalidArgument, "scale function argument must be >= 0");
  if (c < 0.0) throw Error(ErrorKind::InvalidArgument, "weight exponent c must be >= 0");
  if (method_ == ScaleMethod::TransformInversion) return inverter_->weighted_integral(x, c);
  const auto p = detail::erlang_params(model_);
  return detail::with_precision(detail::erlang_loss_digits(p, x, {c}, false), [&](auto tag) {
    return detail::to_double(detail::ErlangSeries<decltype(tag)>(p).weighted_integral(x, c));
  });
}

Matrix ScaleMatrix::z_matrix(double x) const {
  const auto n = model_.ph().phases();
  return Matrix::Identity(n, n) - integral(x) * f_matrix(model_, 0.0);
}

double ScaleMatrix::growth_rate() const {
  if (inverter_) return inverter_->abscissa();
  return detail::rightmost_pole(detail::map_params(model_));
}

Matrix erlang_w(double lambda, double d, int n, double z, double x, double theta) {
  return ScaleMatrix(MapModel::make(erlang(n, lambda), theta, d, z), ScaleMethod::ErlangClosedForm).w(x);
}

Matrix erlang_w_integral(double lambda, double d, int n, double z, double x, double theta) {
  return ScaleMatrix(MapModel::make(erlang(n, lambda), theta, d, z), ScaleMethod::ErlangClosedForm).integral(x);
}

Matrix z_matrix(const MapModel& model, double x) { return ScaleMatrix(model).z_matrix(x); }

Matrix general_w(const MapModel& model, double x, double rel_tol) {
  return ScaleMatrix(model, ScaleMethod::TransformInversion, rel_tol).w(x);
}

Matrix tilted_w(const ScaleMatrix& w0, const Vector& delta, double x) {
  if (delta.size() != w0.model().ph().phases()) {
    throw Error(ErrorKind::InvalidArgument, "delta length does not match the phase count");
  }
  return std::exp(x) * delta.cwiseInverse().asDiagonal() * w0.w(x) * delta.asDiagonal();
}

Matrix first_passage_generator(const MapModel& model) {
  return detail::first_passage_generator(detail::map_params(model));
}

}  // namespace sprt_exact
