#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sprt_exact {

enum class ErrorKind {
  // Input validation.
  InvalidArgument,
  NonStochasticInitial,
  NotSubgenerator,
  SingularGenerator,
  DegenerateTargets,
  // Numerical failures.
  SeriesOverflow,
  InversionDiverged,
  SingularTransform,
  ScaleEvaluationFailed,
  IllConditionedSolve,
  OutsideOptimalityRegion,
  NoConvergence,
  AllCapped,
};

std::string_view to_string(ErrorKind kind);

/// True for kinds caused by bad input rather than by a numerical failure.
bool is_validation_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sprt_exact
