#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kdvinv/harness/expression.hpp"
#include "kdvinv/mesh.hpp"
#include "kdvinv/nonlinearity.hpp"
#include "kdvinv/observation.hpp"

namespace kdvinv::harness {

inline constexpr int schema_version = 1;

// A datum given as a number, an analytic expression, or "@path" to a CSV
// file of samples: (coordinate, value) rows for functions of one variable,
// (t, x, value) rows on a tensor grid for fields. Sampled data is linearly
// interpolated onto the run grid.
struct DataRef {
  nlohmann::json raw;

  bool is_file() const { return raw.is_string() && raw.get<std::string>().rfind('@', 0) == 0; }
};

struct NonlinearitySpec {
  std::string name = "zero";
  std::vector<double> coefficients;

  Nonlinearity build() const;
};

struct PhysicsConfig {
  double b = 0.0;
  double R = 1.0;
  double T = 1.0;
  int k = 1;
  NonlinearitySpec nonlinearity;
};

struct GridConfig {
  int N = 100;
  int M = 100;
};

struct DataConfig {
  std::optional<DataRef> u0, mu0, nu0, nu1, h0, h, f1;
  // Known amplitude of h: used by the forward problem and, as part of the
  // full source, by problem 3.
  std::optional<DataRef> F;
  std::vector<DataRef> omega;
  std::vector<DataRef> phi;
};

struct TruthConfig {
  std::optional<DataRef> F, nu1;
  // Exact forward solution, enables error tables for forward runs.
  std::optional<DataRef> u;
};

struct SolverConfig {
  double tol = 1e-8;
  int max_outer = 50;
  double inner_tol = 1e-10;
  int inner_max_iter = 1000;
  // <= 0 selects the library default.
  double gamma = 0.0;
  double delta_floor = 1e-8;
  double compat_tol_factor = 10.0;
  std::optional<double> compat_tol;
  // Absolute X^0 tolerance of the forward Picard iteration.
  double forward_tol = 1e-11;
  int forward_max_iter = 200;
};

struct NoiseConfig {
  // Uniform noise on the measurements, relative to max |phi_j|.
  double level = 0.0;
  // Centered moving-average width applied to the measurements; <= 1 is off.
  int window = 0;
};

struct ScenarioConfig {
  ProblemKind problem = ProblemKind::forward;
  Parameters parameters;
  PhysicsConfig physics;
  GridConfig grid;
  DataConfig data;
  TruthConfig truth;
  SolverConfig solver;
  NoiseConfig noise;
  // Default values per sweep axis.
  std::map<std::string, std::vector<double>> sweep;
  // Directory that relative "@path" references resolve against.
  std::filesystem::path base_dir;

  Grid make_grid(int refine = 1) const;
};

// Throws ConfigError on a malformed document or unknown fields.
ScenarioConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);
// Normalized echo; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ScenarioConfig& c);

std::string problem_name(ProblemKind p);
ProblemKind parse_problem(const std::string& s);

enum class RunMode { forward, inverse, twin, check };
// Throws ConfigError naming the first missing field required by the mode.
void require_fields(const ScenarioConfig& c, RunMode mode);

// Sampling of a reference on a grid; `field` names the datum in errors.
SpaceProfile sample_profile(const ScenarioConfig& c, const DataRef& ref, const Grid& g, const std::string& field);
TimeSeries sample_series(const ScenarioConfig& c, const DataRef& ref, const Grid& g, const std::string& field);
Field sample_field(const ScenarioConfig& c, const DataRef& ref, const Grid& g, const std::string& field);

}  // namespace kdvinv::harness
