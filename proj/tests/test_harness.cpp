#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "kdvinv/harness/config.hpp"
#include "kdvinv/harness/expression.hpp"
#include "kdvinv/harness/report.hpp"
#include "kdvinv/harness/runs.hpp"
#include "support.hpp"

using namespace kdvinv;
using namespace kdvinv::harness;
using doctest::Approx;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("kdvinv_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

json demo_json() { return json::parse(read_file(kdvinv::testing::source_path("scenarios/demo.json"))); }

ScenarioConfig small(json doc) {
  doc["grid"] = {{"N", 60}, {"M", 60}};
  return parse_config(doc);
}

}  // namespace

TEST_CASE("expression evaluation") {
  const Parameters p{{"A", 2.0}};
  CHECK(Expression::parse("1 + 2*3")(0, 0) == 7.0);
  CHECK(Expression::parse("-2^2")(0, 0) == -4.0);
  CHECK(Expression::parse("2^3^2")(0, 0) == 512.0);
  CHECK(Expression::parse("A*sin(pi*x)", p)(0, 0.5) == Approx(2.0));
  CHECK(Expression::parse("exp(-t)*x", p)(1.0, 3.0) == Approx(3.0 / std::exp(1.0)));
  CHECK(Expression::parse("sqrt(abs(-9)) + log(e)")(0, 0) == Approx(4.0));
  const Expression e = Expression::parse("t*x");
  CHECK(e.uses_t());
  CHECK(e.uses_x());
  CHECK_FALSE(Expression::parse("A", p).uses_t());
  CHECK(Expression::constant(0.25)(1, 1) == 0.25);
}

TEST_CASE("expression errors") {
  CHECK_THROWS_AS(Expression::parse("1 +"), ConfigError);
  CHECK_THROWS_AS(Expression::parse("foo(x)"), ConfigError);
  CHECK_THROWS_AS(Expression::parse("B*x"), ConfigError);
  CHECK_THROWS_AS(Expression::parse("(x"), ConfigError);
  CHECK_THROWS_AS(Expression::parse("x y"), ConfigError);
}

TEST_CASE("config round trip") {
  const ScenarioConfig c = parse_config(demo_json());
  CHECK(c.problem == ProblemKind::two_measurements);
  CHECK(c.grid.N == 200);
  CHECK(c.data.omega.size() == 2);
  CHECK(c.parameters.at("A") == 0.1);
  const json echo = to_json(c);
  CHECK(to_json(parse_config(echo)) == echo);
}

TEST_CASE("config errors name the offending field") {
  json doc = demo_json();
  doc["data"].erase("u0");
  const ScenarioConfig c = parse_config(doc);
  try {
    require_fields(c, RunMode::inverse);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("data.u0") != std::string::npos);
  }

  json unknown = demo_json();
  unknown["physics"]["c"] = 1;
  try {
    parse_config(unknown);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("physics.c") != std::string::npos);
  }

  json schema = demo_json();
  schema["schema"] = 2;
  CHECK_THROWS_AS(parse_config(schema), ConfigError);

  json bad_grid = demo_json();
  bad_grid["grid"]["N"] = 2;
  CHECK_THROWS_AS(parse_config(bad_grid), ConfigError);
}

TEST_CASE("profiles must not depend on time") {
  json doc = demo_json();
  doc["data"]["u0"] = "t*x";
  const ScenarioConfig c = parse_config(doc);
  CHECK_THROWS_AS(build_scenario(c, c.make_grid()), ConfigError);
}

TEST_CASE("CSV data references") {
  const auto dir = scratch("csv");
  {
    std::ofstream f(dir / "mu0.csv");
    f << "t,value\n0,0\n0.25,0.5\n0.5,1\n";
  }
  {
    std::ofstream f(dir / "h.csv");
    f << "t,x,value\n";
    for (double t : {0.0, 0.5}) {
      for (double x : {0.0, 0.5, 1.0}) f << t << "," << x << "," << 1 + x << "\n";
    }
  }
  json doc = demo_json();
  doc["data"]["h"] = "@h.csv";
  const ScenarioConfig c = parse_config(doc, dir);
  const Grid g = make_grid(1.0, 0.5, 10, 10);
  const TimeSeries mu = sample_series(c, DataRef{"@mu0.csv"}, g, "data.mu0");
  CHECK(mu[5] == Approx(0.5));
  CHECK(mu[10] == Approx(1.0));
  const Field h = sample_field(c, DataRef{"@h.csv"}, g, "data.h");
  CHECK(h(3, 7) == Approx(1.7));
  CHECK_THROWS_AS(sample_series(c, DataRef{"@missing.csv"}, g, "data.mu0"), ConfigError);
  CHECK(to_json(c)["data"]["h"] == "@h.csv");
}

TEST_CASE("twin with zero amplitude recovers nearly zero") {
  json doc = demo_json();
  doc["problem"] = 2;
  doc["truth"]["F"] = 0;
  doc["data"]["h0"] = "A*(1+pi-pi^3)*cos(pi*x+t) + A^2*pi*sin(pi*x+t)*cos(pi*x+t)";
  const ScenarioConfig c = small(doc);
  const RunArtifact a = run_twin(c);
  CHECK(a.exit_code == exit_ok);
  const json& F = a.summary["result"]["F"]["values"];
  double m = 0.0;
  for (const auto& v : F) m = std::max(m, std::abs(v.get<double>()));
  // Only the synthesis grid mismatch remains.
  CHECK(m <= 5e-3);
}

TEST_CASE("noisy twin reports the perturbation") {
  json doc = demo_json();
  doc["problem"] = 3;
  doc["noise"] = {{"level", 1e-3}, {"window", 5}};
  const RunArtifact a = run_twin(small(doc), 7);
  CHECK(a.exit_code == exit_ok);
  CHECK(a.summary["noise"]["level"] == 1e-3);
  CHECK(a.summary["noise"]["window"] == 5);
  const double dev = a.summary["noise"]["max_perturbation"].get<double>();
  CHECK(dev > 0.0);
  CHECK(dev <= 1e-3 * 0.1);
}

TEST_CASE("perturb is seeded and bounded") {
  const Grid g = make_grid(1.0, 1.0, 10, 100);
  const TimeSeries phi = TimeSeries::sample(g, [](double t) { return std::sin(t); });
  const TimeSeries a = perturb(phi, 0.01, 0, 3), b = perturb(phi, 0.01, 0, 3), c = perturb(phi, 0.01, 0, 4);
  CHECK((a - b).max_abs() == 0.0);
  CHECK((a - c).max_abs() > 0.0);
  CHECK((a - phi).max_abs() <= 0.01 * phi.max_abs());
  CHECK((perturb(phi, 0.0, 0, 1) - phi).max_abs() == 0.0);
}

TEST_CASE("report files") {
  const auto dir = scratch("report");
  RunArtifact empty;
  empty.kind = "check";
  emit_report(empty, dir);
  const json s = json::parse(read_file(dir / "summary.json"));
  CHECK(s["kind"] == "check");
  CHECK(read_file(dir / "series.csv") == "t,series,value\n");
  CHECK(json::parse(read_file(dir / "timings.json")).is_object());

  RunArtifact a;
  a.kind = "forward";
  const Grid g = make_grid(1.0, 1.0, 8, 2);
  a.series.push_back({"u_left", TimeSeries::constant(g, 0.5)});
  a.tables.push_back({"errors", Table{{"name", "value"}, {{"a,b", 1.5}}}});
  emit_report(a, dir);
  CHECK(read_file(dir / "series.csv") == "t,series,value\n0,u_left,0.5\n0.5,u_left,0.5\n1,u_left,0.5\n");
  CHECK(read_file(dir / "table_errors.csv") == "name,value\n\"a,b\",1.5\n");
}

TEST_CASE("summaries are deterministic") {
  json doc = demo_json();
  doc["problem"] = 3;
  const ScenarioConfig c = small(doc);
  CHECK(summary_text(run_twin(c)) == summary_text(run_twin(c)));
}

TEST_CASE("check run reports preconditions") {
  const RunArtifact a = run_check(small(demo_json()));
  CHECK(a.exit_code == exit_ok);
  CHECK(a.summary["preconditions"]["all_ok"] == true);
}

TEST_CASE("forward run converges at second order") {
  const ScenarioConfig c = load_config(kdvinv::testing::source_path("scenarios/forward_manufactured.json"));
  const RunArtifact a = run_forward(c);
  CHECK(a.exit_code == exit_ok);
  bool found = false;
  for (const auto& [name, t] : a.tables) {
    if (name != "convergence") continue;
    found = true;
    CHECK(t.rows.size() == 3);
  }
  CHECK(found);
}

TEST_CASE("sweep arguments") {
  const ScenarioConfig c = small(demo_json());
  CHECK_THROWS_AS(run_sweep(c, SweepAxis::T, {}), ConfigError);
  CHECK(parse_axis("gamma") == SweepAxis::gamma);
  CHECK(axis_name(SweepAxis::amplitude) == "amplitude");
  CHECK_THROWS_AS(parse_axis("speed"), ConfigError);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == exit_config);
  CHECK(exit_code_for(NoContraction("x")) == exit_no_contraction);
  CHECK(exit_code_for(PreconditionError("nondegeneracy", "x")) == exit_precondition);
  CHECK(exit_code_for(std::runtime_error("x")) == exit_other);
}
