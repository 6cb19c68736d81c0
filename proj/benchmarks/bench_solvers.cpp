#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "kdvinv/forward_solver.hpp"
#include "kdvinv/inverse_solvers.hpp"

using namespace kdvinv;

namespace {

LinearProblem sample_problem(int n) {
  const Grid g = make_grid(1.0, 0.5, n, n);
  LinearProblem p = LinearProblem::zero(g, 1.0);
  p.u0 = SpaceProfile::sample(g, [](double x) { return std::sin(std::numbers::pi * x); });
  p.nu1 = TimeSeries::constant(g, -std::numbers::pi);
  p.f0 = Field::sample(g, [](double t, double x) { return std::cos(x + t); });
  return p;
}

void BM_SolveLinear(benchmark::State& state) {
  const LinearProblem p = sample_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_linear(p).u.max_abs());
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_SolveLinear)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond)->Complexity();

void BM_SolveNonlinear(benchmark::State& state) {
  LinearProblem p = sample_problem(static_cast<int>(state.range(0)));
  p.u0 *= 0.1;
  p.nu1 *= 0.1;
  p.f0 *= 0.1;
  const Nonlinearity g = Nonlinearity::kdv_quadratic();
  for (auto _ : state) benchmark::DoNotOptimize(solve_nonlinear(p, g, 1e-11, 100).u.max_abs());
}
BENCHMARK(BM_SolveNonlinear)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Gamma1(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid g = make_grid(1.0, 0.5, n, n);
  const Field h = Field::sample(g, [](double, double x) { return 1.0 + x; });
  LinearProblem p = LinearProblem::zero(g, 1.0);
  p.nu1 = TimeSeries::sample(g, [](double t) { return std::sin(t); });
  p.f0 = h.scaled_rows(TimeSeries::sample(g, [](double t) { return t * std::exp(-t); }));
  const Field u = solve_linear(p).u;
  const Weight w1 = Weight::from_profile(SpaceProfile::sample(g, [](double x) { return x * x * (1 - x); }), 1.0);
  const Weight w2 = Weight::from_profile(SpaceProfile::sample(g, [](double x) { return x * x * x * (1 - x); }), 1.0);
  const TimeSeries phi1 = q_of(u, w1), phi2 = q_of(u, w2);
  for (auto _ : state) benchmark::DoNotOptimize(gamma1(phi1, phi2, w1, w2, h, 1.0).iterations);
}
BENCHMARK(BM_Gamma1)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
