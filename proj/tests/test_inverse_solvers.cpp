#include <cmath>
#include <functional>
#include <string>

#include "doctest.h"
#include "kdvinv/calculus.hpp"
#include "kdvinv/harness/runs.hpp"
#include "kdvinv/inverse_solvers.hpp"
#include "support.hpp"

using namespace kdvinv;
using doctest::Approx;

namespace {

const Grid grid = make_grid(1.0, 0.5, 200, 200);

Weight w1() { return Weight::from_profile(SpaceProfile::sample(grid, [](double x) { return x * x * (1 - x); }), 1.0); }
Weight w2() {
  return Weight::from_profile(SpaceProfile::sample(grid, [](double x) { return x * x * x * (1 - x); }), 1.0);
}
Field h_field() {
  return Field::sample(grid, [](double, double x) { return 1.0 + x; });
}

// Reduced measurements produced by the controls alone.
std::vector<TimeSeries> reduced(const TimeSeries& F, const TimeSeries& nu, const std::vector<Weight>& ws) {
  LinearProblem p = LinearProblem::zero(grid, 1.0);
  p.nu1 = nu;
  p.f0 = h_field().scaled_rows(F);
  const Field u = solve_linear(p).u;
  std::vector<TimeSeries> out;
  for (const Weight& w : ws) out.push_back(q_of(u, w));
  return out;
}

double rel_error(const TimeSeries& got, const TimeSeries& truth) { return l2_norm(got - truth) / l2_norm(truth); }

TimeSeries series(const std::function<double(double)>& fn) { return TimeSeries::sample(grid, fn); }

harness::ScenarioConfig small_demo() {
  harness::ScenarioConfig c = kdvinv::testing::demo_config();
  c.grid.N = 100;
  c.grid.M = 100;
  return c;
}

Scenario demo_scenario(const harness::ScenarioConfig& c) {
  const harness::Synthesis syn = harness::synthesize(c);
  Scenario s = harness::build_scenario(c, c.make_grid());
  s.measurements = syn.measurements;
  return s;
}

}  // namespace

TEST_CASE("zero reduced data give zero controls") {
  const TimeSeries z = TimeSeries::zeros(grid);
  const InnerResult r = gamma1(z, z, w1(), w2(), h_field(), 1.0);
  CHECK(r.iterations == 1);
  CHECK(r.F.max_abs() == 0.0);
  CHECK(r.nu.max_abs() == 0.0);
  CHECK(gamma3(z, w1(), grid, 1.0).nu.max_abs() == 0.0);
}

TEST_CASE("gamma1 recovers amplitude and flux") {
  const TimeSeries F = series([](double t) { return t * std::exp(-t); });
  const TimeSeries nu = series([](double t) { return std::sin(t); });
  const auto phi = reduced(F, nu, {w1(), w2()});
  const InnerResult r = gamma1(phi[0], phi[1], w1(), w2(), h_field(), 1.0);
  CHECK(rel_error(r.F, F) <= 0.01);
  CHECK(rel_error(r.nu, nu) <= 0.01);
  CHECK(r.gamma == Approx(64.0 / grid.T));
}

TEST_CASE("gamma2 recovers the amplitude") {
  const TimeSeries F = series([](double t) { return t * std::sin(2 * t); });
  const auto phi = reduced(F, TimeSeries::zeros(grid), {w1()});
  const InnerResult r = gamma2(phi[0], w1(), h_field(), 1.0);
  CHECK(rel_error(r.F, F) <= 0.01);
  CHECK(r.nu.max_abs() == 0.0);
}

TEST_CASE("gamma3 recovers the flux") {
  const TimeSeries nu = series([](double t) { return t * t * std::exp(-t); });
  const auto phi = reduced(TimeSeries::zeros(grid), nu, {w1()});
  const InnerResult r = gamma3(phi[0], w1(), grid, 1.0);
  CHECK(rel_error(r.nu, nu) <= 0.01);
}

TEST_CASE("inner maps are linear in the data") {
  const TimeSeries a = series([](double t) { return t * t; });
  const TimeSeries b = series([](double t) { return std::sin(3 * t) * t; });
  InnerOptions o;
  o.tol = 1e-12;
  const InnerResult ra = gamma2(a, w1(), h_field(), 1.0, o);
  const InnerResult rb = gamma2(b, w1(), h_field(), 1.0, o);
  const InnerResult r2 = gamma2(a * 2.0, w1(), h_field(), 1.0, o);
  const InnerResult rs = gamma2(a + b, w1(), h_field(), 1.0, o);
  CHECK((r2.F - ra.F * 2.0).max_abs() <= 1e-8 * r2.F.max_abs());
  CHECK((rs.F - ra.F - rb.F).max_abs() <= 1e-8 * rs.F.max_abs());
}

TEST_CASE("inner iteration options are validated") {
  const TimeSeries a = series([](double t) { return t; });
  InnerOptions o;
  o.tol = 0.0;
  CHECK_THROWS_AS(gamma3(a, w1(), grid, 1.0, o), DomainError);
  CHECK_THROWS_AS(gamma3(a, w1(), grid, 2.0), DomainError);
}

TEST_CASE("degenerate determinant is refused") {
  const TimeSeries a = series([](double t) { return t; });
  CHECK_THROWS_AS(gamma1(a, a, w1(), w1(), h_field(), 1.0), NondegeneracyError);
}

TEST_CASE("linear problem needs a single outer iteration") {
  harness::ScenarioConfig c = small_demo();
  c.problem = ProblemKind::source_amplitude;
  Scenario s = demo_scenario(c);
  s.g = Nonlinearity::zero();
  const InverseResult r = solve_inverse2(s);
  CHECK(r.converged);
  CHECK(r.outer_residuals.size() == 1);
  REQUIRE(r.F);
  CHECK_FALSE(r.nu1);
}

TEST_CASE("demo problem 1 converges and reproduces the measurements") {
  const harness::ScenarioConfig c = small_demo();
  const Scenario s = demo_scenario(c);
  const InverseResult r = solve_inverse1(s);
  CHECK(r.converged);
  CHECK(r.outer_residuals.size() <= 10);
  for (std::size_t i = 2; i < r.outer_residuals.size(); ++i) CHECK(r.outer_residuals[i] < r.outer_residuals[i - 1]);
  REQUIRE(r.F);
  REQUIRE(r.nu1);
  CHECK(r.trace_residual <= 1e-3);
  CHECK(r.measurement_residual <= 1e-5);
  const TimeSeries F = TimeSeries::sample(s.grid, [](double t) { return 0.1 * std::sin(kdvinv::testing::pi * t); });
  CHECK(l2_norm(*r.F - F) / l2_norm(F) <= 0.1);
}

TEST_CASE("large data raise NoContraction naming the smallness constant") {
  const harness::ScenarioConfig c = small_demo();
  Scenario s = demo_scenario(c);
  const double k = 1000.0;
  s.u0 *= k;
  s.mu0 *= k;
  s.nu0 *= k;
  s.h0 *= k;
  for (auto& m : s.measurements) m *= k;
  try {
    solve_inverse1(s);
    FAIL("expected NoContraction");
  } catch (const NoContraction& e) {
    CHECK(std::string(e.what()).find("smallness") != std::string::npos);
  }
}

TEST_CASE("contraction probe") {
  harness::ScenarioConfig c = small_demo();
  const std::vector<double> gammas{1, 4, 16, 64};
  for (ProblemKind p : {ProblemKind::source_amplitude, ProblemKind::boundary_flux}) {
    c.problem = p;
    const Scenario s = demo_scenario(c);
    const auto rows = contraction_probe(p, s, gammas);
    REQUIRE(rows.size() == gammas.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].gamma == gammas[i]);
      if (i > 0) CHECK(rows[i].factor <= rows[i - 1].factor);
    }
    CHECK(rows.back().factor < 1.0);
    for (const auto& row : contraction_probe(p, s, {0.0, 16.0}, 0.0)) CHECK(row.factor == 0.0);
  }
  // Problem 1 contracts in the weighted norm only at large rates.
  const Scenario s = demo_scenario(small_demo());
  const auto rows = contraction_probe(ProblemKind::two_measurements, s, {64, 256, 1024});
  CHECK(rows[1].factor < rows[0].factor);
  CHECK(rows[2].factor < rows[1].factor);
  CHECK(rows[2].factor < 1.0);
  CHECK_THROWS_AS(contraction_probe(ProblemKind::forward, s, gammas), DomainError);
}

TEST_CASE("measurements of the base solution give a zero amplitude") {
  harness::ScenarioConfig c = small_demo();
  c.problem = ProblemKind::source_amplitude;
  Scenario s = harness::build_scenario(c, c.make_grid());
  s.F = TimeSeries::zeros(s.grid);
  const Field u = solve_nonlinear(s.linear_problem(*s.nu1, s.h0, s.f1), s.g, 1e-13, 100).u;
  s.measurements = {q_of(u, s.weights[0])};
  s.F.reset();
  const InverseResult r = solve_inverse2(s);
  REQUIRE(r.F);
  CHECK(r.F->max_abs() <= 1e-6);
}

TEST_CASE("solve_inverse rejects the forward id") {
  const Scenario s = demo_scenario(small_demo());
  CHECK_THROWS_AS(solve_inverse(ProblemKind::forward, s), DomainError);
}
