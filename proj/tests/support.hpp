#pragma once

#include <sprt_exact/phasetype.hpp>
#include <sprt_exact/sprt.hpp>

#include <algorithm>
#include <cmath>

namespace sprt_exact::testing {

/// Erlang(n, rho / (1 - rho)) null with theta = 1.
inline TestProblem erlang_problem(int n, double rho) { return TestProblem::make(erlang(n, rho / (1.0 - rho)), 1.0); }

inline double rel_diff(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

inline double max_rel_diff(const Matrix& got, const Matrix& want) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < want.rows(); ++i) {
    for (Eigen::Index j = 0; j < want.cols(); ++j) {
      worst = std::max(worst, std::abs(got(i, j) - want(i, j)) / std::max(1.0, std::abs(want(i, j))));
    }
  }
  return worst;
}

}  // namespace sprt_exact::testing
