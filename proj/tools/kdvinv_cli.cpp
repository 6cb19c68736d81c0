#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kdvinv/harness/config.hpp"
#include "kdvinv/harness/runs.hpp"

namespace h = kdvinv::harness;

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Common& c, bool seeded) {
  cmd->add_option("--config", c.config, "scenario config (JSON, schema 1)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  if (seeded) cmd->add_option("--seed", c.seed, "seed of the measurement noise")->capture_default_str();
}

void print_outcome(const h::RunArtifact& a, const std::string& out) {
  const auto& s = a.summary;
  std::cout << a.kind << ": " << s.value("status", "ok");
  if (s.contains("error")) std::cout << " (" << s["error"].value("type", "") << ") " << s["error"].value("message", "");
  if (s.contains("errors")) {
    for (const auto& [name, e] : s["errors"].items()) {
      const auto& v = e["rel_l2"].is_null() ? e["abs_l2"] : e["rel_l2"];
      std::cout << "  " << name << " error " << v.dump();
    }
  }
  if (s.contains("preconditions")) {
    for (const auto& w : s["preconditions"]["failures"]) std::cout << "\n  failure: " << w.get<std::string>();
    for (const auto& w : s["preconditions"]["warnings"]) std::cout << "\n  warning: " << w.get<std::string>();
  }
  std::cout << "\n  report: " << out << "/summary.json\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward and inverse solvers for the generalized KdV equation"};
  app.require_subcommand(1);

  Common forward_opts, inverse_opts, twin_opts, sweep_opts, check_opts;
  std::optional<int> inverse_problem, twin_problem, check_problem;
  std::string axis;
  std::vector<double> values;

  auto* forward = app.add_subcommand("forward", "solve the forward problem");
  add_common(forward, forward_opts, false);

  auto* inverse = app.add_subcommand("inverse", "recover controls from the measurements in the config");
  add_common(inverse, inverse_opts, false);
  inverse->add_option("--problem", inverse_problem, "inverse problem 1, 2 or 3")->check(CLI::Range(1, 3));

  auto* twin = app.add_subcommand("twin", "synthesize measurements from the truth block and invert them");
  add_common(twin, twin_opts, true);
  twin->add_option("--problem", twin_problem, "inverse problem 1, 2 or 3")->check(CLI::Range(1, 3));

  auto* sweep = app.add_subcommand("sweep", "repeat the base run over one parameter");
  add_common(sweep, sweep_opts, true);
  sweep->add_option("--axis", axis, "T, amplitude, grid or gamma")
      ->required()
      ->check(CLI::IsMember({"T", "amplitude", "grid", "gamma"}));
  sweep->add_option("--values", values, "values of the axis (default: the config's sweep block)")->delimiter(',');

  auto* check = app.add_subcommand("check", "evaluate the preconditions only");
  add_common(check, check_opts, false);
  check->add_option("--problem", check_problem, "inverse problem 1, 2 or 3")->check(CLI::Range(1, 3));

  CLI11_PARSE(app, argc, argv);

  const auto with_problem = [](h::ScenarioConfig c, const std::optional<int>& p) {
    if (p) c.problem = h::parse_problem(std::to_string(*p));
    return c;
  };

  const Common* common = nullptr;
  try {
    h::RunArtifact a;
    if (forward->parsed()) {
      common = &forward_opts;
      a = h::run_forward(h::load_config(common->config));
    } else if (inverse->parsed()) {
      common = &inverse_opts;
      a = h::run_inverse(with_problem(h::load_config(common->config), inverse_problem));
    } else if (twin->parsed()) {
      common = &twin_opts;
      a = h::run_twin(with_problem(h::load_config(common->config), twin_problem), common->seed);
    } else if (sweep->parsed()) {
      common = &sweep_opts;
      const h::ScenarioConfig c = h::load_config(common->config);
      if (values.empty() && c.sweep.count(axis)) values = c.sweep.at(axis);
      a = h::run_sweep(c, h::parse_axis(axis), values, common->seed);
    } else {
      common = &check_opts;
      a = h::run_check(with_problem(h::load_config(common->config), check_problem));
    }
    h::emit_report(a, common->out);
    print_outcome(a, common->out);
    return a.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return h::exit_code_for(e);
  }
}
