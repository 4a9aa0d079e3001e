#include "model_io.hpp"
#include "output.hpp"

#include <sprt_exact/error.hpp>
#include <sprt_exact/parallel.hpp>
#include <sprt_exact/sim.hpp>
#include <sprt_exact/solver.hpp>
#include <sprt_exact/sprt.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace sprt_exact;
using sprt_exact::cli::Format;
using sprt_exact::cli::Json;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct ModelArgs {
  std::string erlang;
  std::string model_file;
  std::optional<double> rho;
  int phases = 2;
  double theta = 1.0;
};

struct OutputArgs {
  std::string path;
  std::string format = "json";
};

struct Args {
  ModelArgs model;
  OutputArgs out;
  std::optional<double> a, b, alpha0, alpha1;
  double tol = kDefaultSolveTol;
  std::string hypothesis = "h0";
  std::vector<double> z;
  int grid = 50;
  double prior = 0.5, c = 0.1, c0 = 1.0, c1 = 2.0;
  std::uint64_t replications = 1'000'000, seed = 1, max_steps = 1'000'000;
  std::string figure_kind;
  std::string rho_grid = "0.3:0.9:25";
  std::vector<double> priors{0.3, 0.7};
  std::vector<double> region_rhos{1.0 / 6.0, 0.5, 5.0 / 6.0};
};

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); }

TestProblem problem_for_rho(double rho, int phases) {
  if (!(rho > 0.0 && rho < 1.0)) invalid("--rho must lie in (0,1)");
  return TestProblem::make(erlang(phases, rho / (1.0 - rho)), 1.0);
}

TestProblem build_problem(const ModelArgs& m) {
  const int given = int(!m.erlang.empty()) + int(!m.model_file.empty()) + int(m.rho.has_value());
  if (given != 1) invalid("exactly one of --erlang, --model, --rho is required");
  if (m.rho) return problem_for_rho(*m.rho, m.phases);
  PhaseTypeDist ph = m.erlang.empty() ? cli::load_model_file(m.model_file) : cli::parse_erlang_flag(m.erlang);
  return TestProblem::make(std::move(ph), m.theta);
}

Boundaries need_bounds(const Args& a) {
  if (!a.a) invalid("--a is required");
  if (!a.b) invalid("--b is required");
  return Boundaries{*a.a, *a.b};
}

ErrorPair need_target(const Args& a) {
  if (!a.alpha0) invalid("--alpha0 is required");
  if (!a.alpha1) invalid("--alpha1 is required");
  return ErrorPair{*a.alpha0, *a.alpha1};
}

Hypothesis hypothesis_of(const std::string& s) { return s == "h1" ? Hypothesis::H1 : Hypothesis::H0; }

Json row_vector(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json matrix_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(row_vector(m.row(i)));
  return out;
}

std::vector<double> parse_grid(const std::string& spec) {
  double start = 0.0, stop = 0.0;
  int count = 0;
  char c1 = 0, c2 = 0, extra = 0;
  if (std::sscanf(spec.c_str(), "%lf%c%lf%c%d%c", &start, &c1, &stop, &c2, &count, &extra) != 5 || c1 != ':' ||
      c2 != ':') {
    invalid("--rho-grid: expected start:stop:count, got '" + spec + "'");
  }
  if (count < 1) invalid("--rho-grid: count must be at least 1");
  if (!(start > 0.0 && stop < 1.0 && start <= stop)) invalid("--rho-grid: need 0 < start <= stop < 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = count == 1 ? start : (start * (count - 1 - i) + stop * i) / (count - 1);
  }
  return out;
}

std::string prior_tag(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pi%g", p);
  return buf;
}

// Runs row(i) for every grid node in parallel; a failure is reported with
// the node's label.
template <class Row>
Json sweep(const std::vector<double>& grid, const char* label, Row row) {
  std::vector<Json> rows(grid.size());
  std::vector<std::optional<Error>> failures(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    try {
      rows[i] = row(grid[i]);
    } catch (const Error& e) {
      std::string msg = e.what();
      const std::string prefix = std::string(to_string(e.kind())) + ": ";
      if (msg.starts_with(prefix)) msg.erase(0, prefix.size());
      char node[64];
      std::snprintf(node, sizeof node, "%s=%g: ", label, grid[i]);
      failures[i] = Error(e.kind(), node + msg);
    }
  });
  for (auto& f : failures) {
    if (f) throw *f;
  }
  Json out = Json::array();
  for (auto& r : rows) {
    if (r.is_array()) {
      for (auto& x : r) out.push_back(std::move(x));
    } else {
      out.push_back(std::move(r));
    }
  }
  return out;
}

Json cmd_tilt(const Args& args) {
  const TestProblem p = build_problem(args.model);
  const TiltResult& t = p.tilted();
  Json out;
  out["theta"] = p.theta();
  out["d"] = t.d;
  out["g0_theta"] = t.g0_theta;
  out["delta"] = row_vector(t.delta.transpose());
  out["nu1"] = row_vector(t.tilted.initial());
  out["T1"] = matrix_json(t.tilted.generator());
  if (const auto& e = t.tilted.erlang_shape()) out["erlang1"] = Json{{"n", e->phases}, {"lambda", e->rate}};
  return out;
}

Json cmd_errors(const Args& args) {
  const TestProblem p = build_problem(args.model);
  Json out;
  if (args.alpha0 || args.alpha1) {
    const ErrorPair target = need_target(args);
    const WaldBounds w = wald_bounds(target);
    const BBounds bb = b_bounds(p, target);
    out["wald_a"] = w.a_lower;
    out["wald_b"] = w.b_upper;
    out["b_low"] = bb.b_low;
    out["b_high"] = bb.b_high;
    if (!args.a && !args.b) return out;
  }
  const Boundaries bd = need_bounds(args);
  const ErrorPair e = errors(p, bd);
  out["a"] = bd.a;
  out["b"] = bd.b;
  out["alpha0"] = e.alpha0;
  out["alpha1"] = e.alpha1;
  return out;
}

Json solve_row(const TestProblem& p, const ErrorPair& target, double tol) {
  const Boundaries bd = solve_boundaries(p, target, tol);
  const Evaluation ev = evaluate(p, bd);
  return Json{{"a", bd.a},
              {"b", bd.b},
              {"achieved_alpha0", ev.errors.alpha0},
              {"achieved_alpha1", ev.errors.alpha1},
              {"E0N", ev.e0n},
              {"E1N", ev.e1n}};
}

Json cmd_solve(const Args& args) { return solve_row(build_problem(args.model), need_target(args), args.tol); }

Json cmd_expected_n(const Args& args) {
  const TestProblem p = build_problem(args.model);
  const Boundaries bd = need_bounds(args);
  return Json{{"a", bd.a},
              {"b", bd.b},
              {"E0N", expected_n(p, bd, Hypothesis::H0)},
              {"E1N", expected_n(p, bd, Hypothesis::H1)}};
}

Json cmd_pgf(const Args& args) {
  const TestProblem p = build_problem(args.model);
  const Boundaries bd = need_bounds(args);
  if (args.z.empty()) invalid("--z is required");
  const Hypothesis h = hypothesis_of(args.hypothesis);
  Json out = Json::array();
  for (double z : args.z) out.push_back(Json{{"hypothesis", args.hypothesis}, {"z", z}, {"pgf", pgf_n(p, bd, z, h)}});
  return out;
}

Json region_rows(const TestProblem& p, int grid, std::optional<double> rho) {
  const RegionBoundary r = optimality_region(p, grid);
  Json out = Json::array();
  const auto add = [&](const char* branch, std::size_t i, const ErrorPair& e) {
    Json row;
    if (rho) row["rho"] = *rho;
    row["branch"] = branch;
    row["index"] = i;
    row["alpha0"] = e.alpha0;
    row["alpha1"] = e.alpha1;
    out.push_back(std::move(row));
  };
  // Lower branch reversed so the curve runs from (0, .) through the star
  // point to (., 0).
  for (std::size_t i = r.lower_curve.size(); i-- > 0;) add("lower", i, r.lower_curve[i]);
  for (std::size_t i = 1; i < r.upper_curve.size(); ++i) add("upper", i, r.upper_curve[i]);
  return out;
}

Json cmd_region(const Args& args) { return region_rows(build_problem(args.model), args.grid, std::nullopt); }

Json bayes_json(const BayesResult& r) {
  Json out{{"a", r.bounds.a}, {"b", r.bounds.b}, {"penalty", r.penalty}, {"unique", !r.non_unique()}};
  out["a_star"] = r.posterior ? Json(r.posterior->a_star) : Json(nullptr);
  out["b_star"] = r.posterior ? Json(r.posterior->b_star) : Json(nullptr);
  out["reason"] = r.reason;
  return out;
}

Json cmd_bayes(const Args& args) {
  const TestProblem p = build_problem(args.model);
  return bayes_json(bayes_optimal(p, PenaltySpec{args.prior, args.c, args.c0, args.c1}, args.tol));
}

Json estimate_json(const Estimate& e) { return Json{{"value", e.value}, {"std_error", e.std_error}}; }

Json cmd_simulate(const Args& args) {
  const TestProblem p = build_problem(args.model);
  const Boundaries bd = need_bounds(args);
  const SimResult r =
      run(p, bd, hypothesis_of(args.hypothesis), SimConfig{args.replications, args.seed, args.max_steps}, args.z);
  Json out{{"hypothesis", args.hypothesis},
           {"a", bd.a},
           {"b", bd.b},
           {"replications", r.replications},
           {"seed", args.seed},
           {"capped", r.capped_count},
           {"reject_h0", estimate_json(r.reject_h0)},
           {"accept_h0", estimate_json(r.accept_h0)},
           {"mean_n", estimate_json(r.mean_n)}};
  Json pgf = Json::array();
  for (const auto& [z, e] : r.pgf_at) pgf.push_back(Json{{"z", z}, {"value", e.value}, {"std_error", e.std_error}});
  out["pgf"] = std::move(pgf);
  return out;
}

Json cmd_figure(const Args& args) {
  const std::string& kind = args.figure_kind;
  const int n = args.model.phases;
  if (kind == "region") {
    return sweep(args.region_rhos, "rho", [&](double rho) { return region_rows(problem_for_rho(rho, n), args.grid, rho); });
  }
  const std::vector<double> grid = parse_grid(args.rho_grid);
  if (kind == "boundaries" || kind == "expected-n") {
    const ErrorPair target{args.alpha0.value_or(0.05), args.alpha1.value_or(0.025)};
    const WaldBounds w = wald_bounds(target);
    return sweep(grid, "rho", [&](double rho) {
      const TestProblem p = problem_for_rho(rho, n);
      const Boundaries bd = solve_boundaries(p, target, args.tol);
      if (kind == "expected-n") {
        const Evaluation ev = evaluate(p, bd);
        return Json{{"rho", rho}, {"E0N", ev.e0n}, {"E1N", ev.e1n}, {"max_EN", std::max(ev.e0n, ev.e1n)}};
      }
      const BBounds bb = b_bounds(p, target);
      return Json{{"rho", rho},           {"a", bd.a},          {"b", bd.b},          {"wald_a", w.a_lower},
                  {"wald_b", w.b_upper}, {"b_low", bb.b_low}, {"b_high", bb.b_high}};
    });
  }
  // bayes-ab and bayes-posterior: one column pair per prior.
  const bool posterior = kind == "bayes-posterior";
  return sweep(grid, "rho", [&](double rho) {
    const TestProblem p = problem_for_rho(rho, n);
    Json row{{"rho", rho}};
    for (double pi : args.priors) {
      const BayesResult r = bayes_optimal(p, PenaltySpec{pi, args.c, args.c0, args.c1});
      const std::string tag = prior_tag(pi);
      if (posterior) {
        row["a_star_" + tag] = r.posterior ? Json(r.posterior->a_star) : Json(nullptr);
        row["b_star_" + tag] = r.posterior ? Json(r.posterior->b_star) : Json(nullptr);
      } else {
        row["a_" + tag] = r.bounds.a;
        row["b_" + tag] = r.bounds.b;
      }
      row["unique_" + tag] = !r.non_unique();
    }
    return row;
  });
}

void add_model_options(CLI::App* cmd, Args& args) {
  cmd->add_option("--erlang", args.model.erlang, "Erlang null as n,lambda");
  cmd->add_option("--model", args.model.model_file, "phase-type model JSON file");
  cmd->add_option("--rho", args.model.rho, "Erlang null with theta=1 and lambda0=rho/(1-rho)");
  cmd->add_option("--phases", args.model.phases, "number of phases used with --rho")->capture_default_str();
  cmd->add_option("--theta", args.model.theta, "tilt parameter")->capture_default_str();
}

void add_output_options(CLI::App* cmd, Args& args) {
  cmd->add_option("-o,--output", args.out.path, "output file (default stdout)");
  cmd->add_option("--format", args.out.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
}

void add_bounds(CLI::App* cmd, Args& args) {
  cmd->add_option("--a", args.a, "lower boundary a <= 0");
  cmd->add_option("--b", args.b, "upper boundary b >= 0");
}

void add_target(CLI::App* cmd, Args& args) {
  cmd->add_option("--alpha0", args.alpha0, "target P0(reject H0)");
  cmd->add_option("--alpha1", args.alpha1, "target P1(reject H1)");
}

void add_hypothesis(CLI::App* cmd, Args& args) {
  cmd->add_option("--hypothesis", args.hypothesis, "h0 or h1")
      ->check(CLI::IsMember({"h0", "h1"}))
      ->capture_default_str();
}

void add_costs(CLI::App* cmd, Args& args) {
  cmd->add_option("--c", args.c, "cost per observation")->capture_default_str();
  cmd->add_option("--c0", args.c0, "cost of rejecting a true H0")->capture_default_str();
  cmd->add_option("--c1", args.c1, "cost of rejecting a true H1")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact SPRT boundaries for a phase-type null against its exponential tilt", "sprt-exact"};
  app.require_subcommand(1);
  Args args;
  Json (*handler)(const Args&) = nullptr;

  const auto command = [&](const char* name, const char* help, Json (*fn)(const Args&)) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_model_options(cmd, args);
    add_output_options(cmd, args);
    cmd->callback([&handler, fn] { handler = fn; });
    return cmd;
  };

  command("tilt", "tilted phase-type law, d and delta", cmd_tilt);

  auto* err = command("errors", "error probabilities at (a,b); Wald and improved bounds for targets", cmd_errors);
  add_bounds(err, args);
  add_target(err, args);

  auto* solve = command("solve", "boundaries matching target errors", cmd_solve);
  add_target(solve, args);
  solve->add_option("--tol", args.tol, "tolerance on the achieved errors")->capture_default_str();

  add_bounds(command("expected-n", "E0 N and E1 N at (a,b)", cmd_expected_n), args);

  auto* pgf = command("pgf", "E z^N at (a,b)", cmd_pgf);
  add_bounds(pgf, args);
  add_hypothesis(pgf, args);
  pgf->add_option("--z", args.z, "one or more z in (0,1]")->delimiter(',');

  command("region", "boundary of the optimality region", cmd_region)
      ->add_option("--grid", args.grid, "nodes per branch")
      ->capture_default_str();

  auto* bayes = command("bayes", "penalty-minimizing boundaries", cmd_bayes);
  bayes->add_option("--prior", args.prior, "P(H0)")->capture_default_str();
  add_costs(bayes, args);
  bayes->add_option("--tol", args.tol, "Nelder-Mead simplex size tolerance")->default_val(1e-6);

  auto* sim = command("simulate", "Monte Carlo of the test at (a,b)", cmd_simulate);
  add_bounds(sim, args);
  add_hypothesis(sim, args);
  sim->add_option("--replications", args.replications)->capture_default_str();
  sim->add_option("--seed", args.seed)->capture_default_str();
  sim->add_option("--max-steps", args.max_steps)->capture_default_str();
  sim->add_option("--z", args.z, "z values for E z^N")->delimiter(',');

  auto* fig = command("figure", "CSV/JSON data behind the figures", cmd_figure);
  fig->add_option("kind", args.figure_kind)
      ->required()
      ->check(CLI::IsMember({"boundaries", "expected-n", "region", "bayes-ab", "bayes-posterior"}));
  fig->add_option("--rho-grid", args.rho_grid, "start:stop:count")->capture_default_str();
  fig->add_option("--rho-list", args.region_rhos, "rho values for the region panel")->delimiter(',');
  fig->add_option("--grid", args.grid, "nodes per region branch")->capture_default_str();
  fig->add_option("--priors", args.priors, "priors for the Bayes panels")->delimiter(',');
  add_target(fig, args);
  add_costs(fig, args);
  fig->add_option("--tol", args.tol)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: InvalidArgument: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    const Format format = args.out.format == "csv" ? Format::Csv : Format::Json;
    cli::emit(cli::render(handler(args), format), args.out.path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation_error(e.kind()) ? kExitValidation : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
