#include <benchmark/benchmark.h>

#include <sprt_exact/phasetype.hpp>
#include <sprt_exact/scale.hpp>
#include <sprt_exact/sim.hpp>
#include <sprt_exact/solver.hpp>
#include <sprt_exact/sprt.hpp>

#include <cmath>

using namespace sprt_exact;

namespace {

TestProblem erlang_problem(int n, double rho) { return TestProblem::make(erlang(n, rho / (1.0 - rho)), 1.0); }

}  // namespace

// range(0): x in tenths
static void BM_ErlangW(benchmark::State& state) {
  const double x = state.range(0) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(erlang_w(1.0, 1.0, 2, 1.0, x));
}
BENCHMARK(BM_ErlangW)->Arg(5)->Arg(25)->Arg(100);

static void BM_GeneralW(benchmark::State& state) {
  const auto model = MapModel::make(erlang(2, 1.0), 1.0, 1.0);
  const double x = state.range(0) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(general_w(model, x));
}
BENCHMARK(BM_GeneralW)->Arg(5)->Arg(25)->Unit(benchmark::kMillisecond);

// range(0): rho in percent
static void BM_Errors(benchmark::State& state) {
  const auto problem = erlang_problem(2, state.range(0) / 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(errors(problem, {-2.5, 2.8}));
}
BENCHMARK(BM_Errors)->Arg(30)->Arg(60)->Arg(90)->Unit(benchmark::kMicrosecond);

static void BM_SolveBoundaries(benchmark::State& state) {
  const auto problem = erlang_problem(2, state.range(0) / 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_boundaries(problem, {0.05, 0.025}));
}
BENCHMARK(BM_SolveBoundaries)->Arg(30)->Arg(60)->Arg(90)->Unit(benchmark::kMillisecond);

static void BM_Simulate(benchmark::State& state) {
  const auto problem = erlang_problem(1, 0.5);
  SimConfig config;
  config.replications = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run(problem, {-3.0, 2.0}, Hypothesis::H0, config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
