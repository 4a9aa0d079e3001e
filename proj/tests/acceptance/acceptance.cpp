// One PASS/FAIL line per acceptance criterion, each under its runtime budget.
//
// Criteria listed with a `known` note cannot hold as written (the note says
// why). They are still evaluated in full and reported as FAIL, but they do
// not change the exit status; any other failure does.

#include "support.hpp"

#include <sprt_exact/scale.hpp>
#include <sprt_exact/sim.hpp>
#include <sprt_exact/solver.hpp>
#include <sprt_exact/sprt.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace sprt_exact;
using sprt_exact::testing::erlang_problem;
using sprt_exact::testing::max_rel_diff;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Verdict()> check;
  const char* known = nullptr;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict scale_basics() {
  double worst = 0.0;
  for (int n : {1, 2, 3}) {
    for (double lambda : {0.5, 1.0, 2.0}) {
      for (double d : {0.5, 1.0}) {
        worst = std::max(worst, (erlang_w(lambda, d, n, 1.0, 0.0) - Matrix::Identity(n, n)).cwiseAbs().maxCoeff());
      }
    }
  }
  return {worst <= 1e-12, fmt("max |W(0) - I| = %.3g over 18 cases (tol 1e-12)", worst)};
}

Verdict transform_identity() {
  const double lambda = 1.0, d = 1.0;
  const auto model = MapModel::make(erlang(2, lambda), 1.0, d);
  double worst = 0.0;
  for (double s : {8.0, 12.0}) {
    const double top = 40.0 / (s - lambda);
    Matrix lt = Matrix::Zero(2, 2);
    for (double left = 0.0; left < top; left += d) {
      const double right = std::min(top, left + d);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          lt(i, j) += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
              [&](double y) { return std::exp(-s * y) * erlang_w(lambda, d, 2, 1.0, y)(i, j); }, left, right, 10,
              1e-13);
        }
      }
    }
    worst = std::max(worst, (lt - f_matrix(model, s).inverse()).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-6, fmt("max entrywise |int e^{-sx} W - F(s)^{-1}| = %.3g for s in {8,12} (tol 1e-6)", worst)};
}

Verdict tilted_scale() {
  const auto r = tilt(erlang(2, 1.0), 1.0);
  const ScaleMatrix w0(MapModel::make(erlang(2, 1.0), 1.0, r.d));
  double worst = 0.0;
  for (double x : {0.1, 0.7, 1.5, 3.0, 6.0}) {
    const Matrix direct = erlang_w(2.0, r.d, 2, 1.0, x);
    const Matrix via = tilted_w(w0, r.delta, x);
    for (Eigen::Index i = 0; i < 2; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) {
        worst = std::max(worst, std::abs(via(i, j) - direct(i, j)) / std::abs(direct(i, j)));
      }
    }
  }
  return {worst < 1e-8, fmt("max relative error of e^x D^-1 W0 D vs W1 = %.3g (tol 1e-8)", worst)};
}

Verdict exponential_closed_form() {
  const auto p = erlang_problem(1, 0.5);
  const auto bd = solve_boundaries(p, {0.05, 0.025});
  const auto e = errors(p, bd);
  const double stated = std::log(0.975 / 0.025) - std::log(2.0);
  const double b_err = std::abs(bd.b - stated);
  const double e_err = std::max(std::abs(e.alpha0 - 0.05), std::abs(e.alpha1 - 0.025));
  return {b_err <= 1e-8 && e_err <= 1e-8,
          fmt("b = %.10f, stated %.10f (diff %.3g); log((1-a0)/a1) - log 2 = %.10f; errors off by %.3g", bd.b, stated,
              b_err, std::log(0.95 / 0.025) - std::log(2.0), e_err)};
}

Verdict general_inversion() {
  const auto model = MapModel::make(erlang(2, 1.0), 1.0, 1.0);
  double worst = 0.0;
  for (double x : {0.5, 2.5}) worst = std::max(worst, max_rel_diff(general_w(model, x), erlang_w(1.0, 1.0, 2, 1.0, x)));
  return {worst <= 1e-6, fmt("max relative difference general_w vs erlang_w = %.3g (tol 1e-6)", worst)};
}

Verdict monte_carlo() {
  struct Case {
    const char* label;
    TestProblem problem;
    Boundaries bounds;
  };
  const auto p2 = erlang_problem(2, 0.5);
  const std::vector<Case> cases{{"exp (-3,2)", erlang_problem(1, 0.5), {-3.0, 2.0}},
                                {"erlang2 rho=0.5 solved", p2, solve_boundaries(p2, {0.05, 0.025})}};
  bool ok = true;
  std::ostringstream os;
  SimConfig cfg;
  cfg.replications = 1'000'000;
  for (const auto& c : cases) {
    const auto ev = evaluate(c.problem, c.bounds);
    cfg.seed = 2024;
    const auto h0 = run(c.problem, c.bounds, Hypothesis::H0, cfg);
    cfg.seed = 2025;
    const auto h1 = run(c.problem, c.bounds, Hypothesis::H1, cfg);
    const auto z = [](const Estimate& est, double want) { return std::abs(est.value - want) / est.std_error; };
    const double zs[] = {z(*h0.alpha0_hat, ev.errors.alpha0), z(*h1.alpha1_hat, ev.errors.alpha1), z(h0.mean_n, ev.e0n),
                         z(h1.mean_n, ev.e1n)};
    double worst = 0.0;
    for (double v : zs) worst = std::max(worst, v);
    ok = ok && worst <= 3.5 && h0.capped_count == 0 && h1.capped_count == 0;
    os << c.label << ": |z| a0 " << fmt("%.2f", zs[0]) << " a1 " << fmt("%.2f", zs[1]) << " E0N "
       << fmt("%.2f", zs[2]) << " E1N " << fmt("%.2f", zs[3]) << "; ";
  }
  os << "limit 3.5 SE at 1e6 replications";
  return {ok, os.str()};
}

Verdict derivative_relation() {
  const double h = 1e-6;
  struct Case {
    TestProblem p;
    Boundaries bd;
  };
  const std::vector<Case> cases{{erlang_problem(1, 0.5), {-3.0, 2.0}}, {erlang_problem(2, 0.5), {-2.59, 2.79}}};
  double worst = 0.0;
  for (const auto& c : cases) {
    for (auto hyp : {Hypothesis::H0, Hypothesis::H1}) {
      const double fd = (1.0 - pgf_n(c.p, c.bd, 1.0 - h, hyp)) / h;
      worst = std::max(worst, std::abs(fd / expected_n(c.p, c.bd, hyp) - 1.0));
    }
  }
  return {worst <= 1e-3, fmt("max relative gap (1 - E z^N)/h vs E N = %.3g over 2 sets x 2 hypotheses (tol 1e-3)", worst)};
}

Verdict boundary_sweep() {
  const ErrorPair target{0.05, 0.025};
  const auto wald = wald_bounds(target);
  bool wald_ok = true, improved_ok = true, gap_ok = true;
  double last_gap = std::numeric_limits<double>::infinity();
  std::ostringstream os;
  os << "b - wald_b:";
  for (int k = 3; k <= 9; ++k) {
    const double rho = k / 10.0;
    const auto p = erlang_problem(2, rho);
    const auto bd = solve_boundaries(p, target);
    const auto bb = b_bounds(p, target);
    wald_ok = wald_ok && bd.a >= wald.a_lower && bd.b <= wald.b_upper;
    improved_ok = improved_ok && bb.b_low <= bd.b && bd.b <= bb.b_high;
    const double gap = wald.b_upper - bd.b;
    gap_ok = gap_ok && gap <= last_gap;
    last_gap = gap;
    os << fmt(" %.3f", bd.b - wald.b_upper);
  }
  os << "; wald " << (wald_ok ? "ok" : "violated") << ", improved bounds " << (improved_ok ? "ok" : "violated")
     << ", gap " << (gap_ok ? "nonincreasing" : "increases");
  return {wald_ok && improved_ok && gap_ok, os.str()};
}

Verdict bayes_invariance() {
  const auto spec = [](double prior) { return PenaltySpec{prior, 0.1, 1.0, 2.0}; };
  const auto p6 = erlang_problem(2, 0.6);
  const auto lo6 = bayes_optimal(p6, spec(0.3));
  const auto hi6 = bayes_optimal(p6, spec(0.7));
  const auto lo3 = bayes_optimal(erlang_problem(2, 0.3), spec(0.3));
  const auto hi3 = bayes_optimal(erlang_problem(2, 0.3), spec(0.7));
  std::ostringstream os;
  bool agree = false;
  if (lo6.non_unique() || hi6.non_unique()) {
    os << "rho=0.6: pi=0.3 " << (lo6.non_unique() ? "non-unique (" + lo6.reason + ")" : "unique") << ", pi=0.7 "
       << (hi6.non_unique() ? "non-unique (" + hi6.reason + ")" : "unique");
  } else {
    const double diff = std::max(std::abs(lo6.posterior->a_star - hi6.posterior->a_star),
                                 std::abs(lo6.posterior->b_star - hi6.posterior->b_star));
    agree = diff <= 1e-4;
    os << fmt("rho=0.6: (a*,b*) differ by %.3g", diff);
  }
  os << "; rho=0.3 pi=0.3 " << (lo3.non_unique() ? "non-unique" : "unique");
  if (!lo3.non_unique() && !hi3.non_unique()) {
    os << fmt(" (a*,b*)=(%.6f,%.6f), pi=0.7 gives (%.6f,%.6f)", lo3.posterior->a_star, lo3.posterior->b_star,
              hi3.posterior->a_star, hi3.posterior->b_star);
  }
  return {agree && lo3.non_unique(), os.str()};
}

Verdict region_consistency() {
  bool ok = true;
  double worst = 0.0;
  for (double rho : {1.0 / 6.0, 0.5, 5.0 / 6.0}) {
    const auto p = erlang_problem(2, rho);
    const auto r = optimality_region(p, 30);
    const auto direct = errors(p, {0.0, 0.0});
    worst = std::max({worst, std::abs(r.star_point.alpha0 - direct.alpha0), std::abs(r.star_point.alpha1 - direct.alpha1)});
    for (std::size_t i = 1; i < r.lower_curve.size(); ++i) {
      ok = ok && r.lower_curve[i].alpha0 < r.lower_curve[i - 1].alpha0 &&
           r.lower_curve[i].alpha1 >= r.lower_curve[i - 1].alpha1;
      ok = ok && r.upper_curve[i].alpha1 < r.upper_curve[i - 1].alpha1 &&
           r.upper_curve[i].alpha0 >= r.upper_curve[i - 1].alpha0;
    }
  }
  return {ok && worst <= 1e-10,
          fmt("star point off by %.3g (tol 1e-10); curves %s for rho in {1/6,1/2,5/6}", worst, ok ? "monotone" : "not monotone")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"scale-function basics", 1.0, scale_basics},
      {"transform identity", 10.0, transform_identity},
      {"tilted scale cross-check", 1.0, tilted_scale},
      {"exponential closed form", 5.0, exponential_closed_form,
       "the stated constant uses 1 - alpha1 = 0.975; the exact identity needs 1 - alpha0 and gives b = log 19"},
      {"general inversion vs closed form", 30.0, general_inversion},
      {"Monte Carlo agreement", 120.0, monte_carlo},
      {"derivative relation", 5.0, derivative_relation},
      {"boundary property sweep", 120.0, boundary_sweep,
       "the stated Wald b bound log((1-alpha1)/alpha0) swaps the errors for this sign convention"},
      {"Bayesian prior invariance", 120.0, bayes_invariance,
       "the interior minimizer occurs at rho=0.3 and the a=0 minimizer at rho=0.6, the reverse of the stated cases"},
      {"optimality region consistency", 60.0, region_consistency},
  };

  int unexpected = 0;
  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = v.pass && secs < c.budget_s;
    std::printf("%s %2zu %s: %s [%.2fs / %.0fs]\n", pass ? "PASS" : "FAIL", i + 1, c.name, v.detail.c_str(), secs,
                c.budget_s);
    if (!pass && c.known) std::printf("        known: %s\n", c.known);
    passed += pass;
    if (!pass && !c.known) ++unexpected;
  }
  std::printf("%d/%zu criteria passed, %d unexpected failure(s)\n", passed, criteria.size(), unexpected);
  return unexpected == 0 ? 0 : 1;
}
