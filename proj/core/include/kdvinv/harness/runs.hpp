#pragma once

#include <cstdint>
#include <exception>
#include <string>
#include <vector>

#include "kdvinv/harness/config.hpp"
#include "kdvinv/harness/report.hpp"
#include "kdvinv/scenario.hpp"

namespace kdvinv::harness {

// Process exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_other = 1, exit_precondition = 2, exit_no_contraction = 3, exit_config = 4 };

int exit_code_for(const std::exception& e);

// Scenario of the config on the grid: data sampled, weights built, phi
// sampled when given. Truth controls are not applied.
Scenario build_scenario(const ScenarioConfig& c, const Grid& g);

struct Synthesis {
  Scenario truth;
  Field u;
  std::vector<TimeSeries> measurements;
  Grid grid;
};

// Nonlinear forward solve with the true controls on a grid refined by
// `refine`, measurements sampled back onto the config grid.
Synthesis synthesize(const ScenarioConfig& c, int refine = 2);

// Uniform noise of relative size `level` (seeded), then a centered moving
// average of width `window` when window > 1.
TimeSeries perturb(const TimeSeries& phi, double level, int window, std::uint64_t seed);

// Solver errors after the preconditions were evaluated are recorded in the
// artifact (status "error", exit code); configuration problems throw
// ConfigError.
RunArtifact run_forward(const ScenarioConfig& c);
RunArtifact run_inverse(const ScenarioConfig& c);
RunArtifact run_twin(const ScenarioConfig& c, std::uint64_t seed = 0);
// Preconditions only. Measurements come from data.phi, or from synthesis
// when absent. Exit code 2 when any hypothesis is flagged.
RunArtifact run_check(const ScenarioConfig& c);

enum class SweepAxis { T, amplitude, grid, gamma };
SweepAxis parse_axis(const std::string& s);
std::string axis_name(SweepAxis a);

// Repeats the base run (forward, twin when a truth block is present,
// inverse otherwise) per value. Axis "amplitude" sets parameter A, "grid"
// sets N with M scaled proportionally, "gamma" sets solver.gamma. Rows run
// concurrently; failures are recorded per row.
RunArtifact run_sweep(const ScenarioConfig& c, SweepAxis axis, const std::vector<double>& values,
                      std::uint64_t seed = 0);

}  // namespace kdvinv::harness
