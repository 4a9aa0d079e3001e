#include "sprt_exact/error.hpp"

namespace sprt_exact {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonStochasticInitial: return "NonStochasticInitial";
    case ErrorKind::NotSubgenerator: return "NotSubgenerator";
    case ErrorKind::SingularGenerator: return "SingularGenerator";
    case ErrorKind::DegenerateTargets: return "DegenerateTargets";
    case ErrorKind::SeriesOverflow: return "SeriesOverflow";
    case ErrorKind::InversionDiverged: return "InversionDiverged";
    case ErrorKind::SingularTransform: return "SingularTransform";
    case ErrorKind::ScaleEvaluationFailed: return "ScaleEvaluationFailed";
    case ErrorKind::IllConditionedSolve: return "IllConditionedSolve";
    case ErrorKind::OutsideOptimalityRegion: return "OutsideOptimalityRegion";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::AllCapped: return "AllCapped";
  }
  return "Unknown";
}

bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::NonStochasticInitial:
    case ErrorKind::NotSubgenerator:
    case ErrorKind::SingularGenerator:
    case ErrorKind::DegenerateTargets:
      return true;
    default:
      return false;
  }
}

}  // namespace sprt_exact
