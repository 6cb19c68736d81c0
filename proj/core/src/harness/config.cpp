#include "kdvinv/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "kdvinv/errors.hpp"

namespace kdvinv::harness {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError("unknown field '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

const json& object_at(const json& doc, const char* key, const std::string& where) {
  static const json empty = json::object();
  if (!doc.contains(key)) return empty;
  const json& v = doc.at(key);
  if (!v.is_object()) throw ConfigError("field '" + where + "' must be an object");
  return v;
}

template <typename T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  const std::string name = where + "." + key;
  if constexpr (std::is_same_v<T, int>) {
    if (!v.is_number_integer()) throw ConfigError("field '" + name + "' must be an integer");
  } else {
    if (!v.is_number()) throw ConfigError("field '" + name + "' must be a number");
  }
  out = v.get<T>();
}

DataRef data_ref(const json& v, const std::string& name) {
  if (!v.is_number() && !v.is_string()) throw ConfigError("field '" + name + "' must be a number or a string");
  return DataRef{v};
}

void read_ref(const json& obj, const char* key, const std::string& where, std::optional<DataRef>& out) {
  if (obj.contains(key)) out = data_ref(obj.at(key), where + "." + key);
}

std::vector<DataRef> read_refs(const json& obj, const char* key, const std::string& where) {
  std::vector<DataRef> out;
  if (!obj.contains(key)) return out;
  const json& v = obj.at(key);
  const std::string name = where + "." + key;
  if (!v.is_array()) throw ConfigError("field '" + name + "' must be an array");
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(data_ref(v[i], name + "[" + std::to_string(i) + "]"));
  return out;
}

void put(json& obj, const char* key, const std::optional<DataRef>& r) {
  if (r) obj[key] = r->raw;
}

// Rows of numbers from a CSV file; blank lines, '#' comments and a
// non-numeric header line are skipped.
std::vector<std::vector<double>> read_csv(const std::filesystem::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigError("field '" + field + "' references missing file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty()) continue;
      throw ConfigError("field '" + field + "': non-numeric row in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("field '" + field + "': no samples in " + path.string());
  return rows;
}

std::filesystem::path file_of(const ScenarioConfig& c, const DataRef& ref) {
  std::filesystem::path p = ref.raw.get<std::string>().substr(1);
  return p.is_absolute() ? p : c.base_dir / p;
}

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x, const std::string& field) {
  const double slack = 1e-9 * (1.0 + std::abs(xs.back() - xs.front()));
  if (x < xs.front() - slack || x > xs.back() + slack) {
    throw ConfigError("field '" + field + "': samples do not cover coordinate " + std::to_string(x));
  }
  if (xs.size() == 1) return ys.front();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t hi = std::clamp<std::size_t>(static_cast<std::size_t>(it - xs.begin()), 1, xs.size() - 1);
  const std::size_t lo = hi - 1;
  const double s = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + s * (ys[hi] - ys[lo]);
}

struct Curve {
  std::vector<double> xs, ys;
};

Curve load_curve(const ScenarioConfig& c, const DataRef& ref, const std::string& field) {
  Curve cv;
  for (const auto& row : read_csv(file_of(c, ref), field)) {
    if (row.size() != 2) throw ConfigError("field '" + field + "': expected rows 'coordinate,value'");
    cv.xs.push_back(row[0]);
    cv.ys.push_back(row[1]);
  }
  for (std::size_t i = 1; i < cv.xs.size(); ++i) {
    if (!(cv.xs[i] > cv.xs[i - 1])) throw ConfigError("field '" + field + "': coordinates must increase");
  }
  return cv;
}

Expression expression_of(const ScenarioConfig& c, const DataRef& ref, const std::string& field) {
  if (ref.raw.is_number()) return Expression::constant(ref.raw.get<double>());
  try {
    return Expression::parse(ref.raw.get<std::string>(), c.parameters);
  } catch (const ConfigError& e) {
    throw ConfigError("field '" + field + "': " + e.what());
  }
}

}  // namespace

Nonlinearity NonlinearitySpec::build() const {
  if (name == "polynomial") return Nonlinearity::polynomial(coefficients);
  try {
    return Nonlinearity::builtin(name);
  } catch (const Error&) {
    throw ConfigError("field 'physics.nonlinearity': unknown nonlinearity '" + name + "'");
  }
}

Grid ScenarioConfig::make_grid(int refine) const {
  try {
    return kdvinv::make_grid(physics.R, physics.T, grid.N * refine, grid.M * refine);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("field 'grid': ") + e.what());
  }
}

std::string problem_name(ProblemKind p) {
  return p == ProblemKind::forward ? "forward" : std::to_string(static_cast<int>(p));
}

ProblemKind parse_problem(const std::string& s) {
  if (s == "forward") return ProblemKind::forward;
  if (s == "1") return ProblemKind::two_measurements;
  if (s == "2") return ProblemKind::source_amplitude;
  if (s == "3") return ProblemKind::boundary_flux;
  throw ConfigError("field 'problem' must be 1, 2, 3 or \"forward\", got '" + s + "'");
}

ScenarioConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc, "",
                 {"schema", "problem", "parameters", "physics", "grid", "data", "truth", "solver", "noise", "sweep"});
  if (!doc.contains("schema")) throw ConfigError("missing field 'schema'");
  if (!doc.at("schema").is_number_integer() || doc.at("schema").get<int>() != schema_version) {
    throw ConfigError("field 'schema' must be " + std::to_string(schema_version));
  }
  ScenarioConfig c;
  c.base_dir = base_dir;

  if (!doc.contains("problem")) throw ConfigError("missing field 'problem'");
  const json& p = doc.at("problem");
  if (p.is_number_integer()) {
    c.problem = parse_problem(std::to_string(p.get<int>()));
  } else if (p.is_string()) {
    c.problem = parse_problem(p.get<std::string>());
  } else {
    throw ConfigError("field 'problem' must be 1, 2, 3 or \"forward\"");
  }

  for (const auto& [key, value] : object_at(doc, "parameters", "parameters").items()) {
    if (!value.is_number()) throw ConfigError("field 'parameters." + key + "' must be a number");
    c.parameters[key] = value.get<double>();
  }

  const json& phys = object_at(doc, "physics", "physics");
  reject_unknown(phys, "physics", {"b", "R", "T", "k", "nonlinearity"});
  read(phys, "b", "physics", c.physics.b);
  read(phys, "R", "physics", c.physics.R);
  read(phys, "T", "physics", c.physics.T);
  read(phys, "k", "physics", c.physics.k);
  if (c.physics.k < 0) throw ConfigError("field 'physics.k' must be nonnegative");
  if (phys.contains("nonlinearity")) {
    const json& nl = phys.at("nonlinearity");
    if (nl.is_string()) {
      c.physics.nonlinearity.name = nl.get<std::string>();
    } else if (nl.is_object()) {
      reject_unknown(nl, "physics.nonlinearity", {"name", "coefficients"});
      if (!nl.contains("name") || !nl.at("name").is_string()) {
        throw ConfigError("field 'physics.nonlinearity.name' must be a string");
      }
      c.physics.nonlinearity.name = nl.at("name").get<std::string>();
      if (nl.contains("coefficients")) {
        const json& co = nl.at("coefficients");
        if (!co.is_array() || !std::all_of(co.begin(), co.end(), [](const json& v) { return v.is_number(); })) {
          throw ConfigError("field 'physics.nonlinearity.coefficients' must be an array of numbers");
        }
        c.physics.nonlinearity.coefficients = co.get<std::vector<double>>();
      }
    } else {
      throw ConfigError("field 'physics.nonlinearity' must be a name or an object");
    }
    c.physics.nonlinearity.build();
  }

  const json& grid = object_at(doc, "grid", "grid");
  reject_unknown(grid, "grid", {"N", "M"});
  read(grid, "N", "grid", c.grid.N);
  read(grid, "M", "grid", c.grid.M);
  c.make_grid();

  const json& data = object_at(doc, "data", "data");
  reject_unknown(data, "data", {"u0", "mu0", "nu0", "nu1", "h0", "h", "f1", "F", "omega", "phi"});
  read_ref(data, "u0", "data", c.data.u0);
  read_ref(data, "mu0", "data", c.data.mu0);
  read_ref(data, "nu0", "data", c.data.nu0);
  read_ref(data, "nu1", "data", c.data.nu1);
  read_ref(data, "h0", "data", c.data.h0);
  read_ref(data, "h", "data", c.data.h);
  read_ref(data, "f1", "data", c.data.f1);
  read_ref(data, "F", "data", c.data.F);
  c.data.omega = read_refs(data, "omega", "data");
  c.data.phi = read_refs(data, "phi", "data");

  const json& truth = object_at(doc, "truth", "truth");
  reject_unknown(truth, "truth", {"F", "nu1", "u"});
  read_ref(truth, "F", "truth", c.truth.F);
  read_ref(truth, "nu1", "truth", c.truth.nu1);
  read_ref(truth, "u", "truth", c.truth.u);

  const json& solver = object_at(doc, "solver", "solver");
  reject_unknown(solver, "solver",
                 {"tol", "max_outer", "inner_tol", "inner_max_iter", "gamma", "delta_floor", "compat_tol_factor",
                  "compat_tol", "forward_tol", "forward_max_iter"});
  read(solver, "tol", "solver", c.solver.tol);
  read(solver, "max_outer", "solver", c.solver.max_outer);
  read(solver, "inner_tol", "solver", c.solver.inner_tol);
  read(solver, "inner_max_iter", "solver", c.solver.inner_max_iter);
  read(solver, "gamma", "solver", c.solver.gamma);
  read(solver, "delta_floor", "solver", c.solver.delta_floor);
  read(solver, "compat_tol_factor", "solver", c.solver.compat_tol_factor);
  if (solver.contains("compat_tol")) {
    double v = 0.0;
    read(solver, "compat_tol", "solver", v);
    c.solver.compat_tol = v;
  }
  read(solver, "forward_tol", "solver", c.solver.forward_tol);
  read(solver, "forward_max_iter", "solver", c.solver.forward_max_iter);
  if (!(c.solver.tol > 0.0) || !(c.solver.inner_tol > 0.0) || !(c.solver.forward_tol > 0.0)) {
    throw ConfigError("field 'solver': tolerances must be positive");
  }
  if (c.solver.max_outer < 1 || c.solver.inner_max_iter < 1 || c.solver.forward_max_iter < 1) {
    throw ConfigError("field 'solver': iteration caps must be >= 1");
  }

  const json& noise = object_at(doc, "noise", "noise");
  reject_unknown(noise, "noise", {"level", "window"});
  read(noise, "level", "noise", c.noise.level);
  read(noise, "window", "noise", c.noise.window);
  if (c.noise.level < 0.0) throw ConfigError("field 'noise.level' must be nonnegative");

  const json& sweep = object_at(doc, "sweep", "sweep");
  reject_unknown(sweep, "sweep", {"T", "amplitude", "grid", "gamma"});
  for (const auto& [axis, values] : sweep.items()) {
    if (!values.is_array() || !std::all_of(values.begin(), values.end(), [](const json& v) { return v.is_number(); })) {
      throw ConfigError("field 'sweep." + axis + "' must be an array of numbers");
    }
    c.sweep[axis] = values.get<std::vector<double>>();
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

json to_json(const ScenarioConfig& c) {
  json doc;
  doc["schema"] = schema_version;
  if (c.problem == ProblemKind::forward) {
    doc["problem"] = "forward";
  } else {
    doc["problem"] = static_cast<int>(c.problem);
  }
  doc["parameters"] = json::object();
  for (const auto& [k, v] : c.parameters) doc["parameters"][k] = v;
  json nl = {{"name", c.physics.nonlinearity.name}};
  if (!c.physics.nonlinearity.coefficients.empty()) nl["coefficients"] = c.physics.nonlinearity.coefficients;
  doc["physics"] = {{"b", c.physics.b}, {"R", c.physics.R}, {"T", c.physics.T}, {"k", c.physics.k}, {"nonlinearity", nl}};
  doc["grid"] = {{"N", c.grid.N}, {"M", c.grid.M}};
  json data = json::object();
  put(data, "u0", c.data.u0);
  put(data, "mu0", c.data.mu0);
  put(data, "nu0", c.data.nu0);
  put(data, "nu1", c.data.nu1);
  put(data, "h0", c.data.h0);
  put(data, "h", c.data.h);
  put(data, "f1", c.data.f1);
  put(data, "F", c.data.F);
  if (!c.data.omega.empty()) {
    data["omega"] = json::array();
    for (const auto& r : c.data.omega) data["omega"].push_back(r.raw);
  }
  if (!c.data.phi.empty()) {
    data["phi"] = json::array();
    for (const auto& r : c.data.phi) data["phi"].push_back(r.raw);
  }
  doc["data"] = data;
  json truth = json::object();
  put(truth, "F", c.truth.F);
  put(truth, "nu1", c.truth.nu1);
  put(truth, "u", c.truth.u);
  doc["truth"] = truth;
  json solver = {{"tol", c.solver.tol},
                 {"max_outer", c.solver.max_outer},
                 {"inner_tol", c.solver.inner_tol},
                 {"inner_max_iter", c.solver.inner_max_iter},
                 {"gamma", c.solver.gamma},
                 {"delta_floor", c.solver.delta_floor},
                 {"compat_tol_factor", c.solver.compat_tol_factor},
                 {"forward_tol", c.solver.forward_tol},
                 {"forward_max_iter", c.solver.forward_max_iter}};
  if (c.solver.compat_tol) solver["compat_tol"] = *c.solver.compat_tol;
  doc["solver"] = solver;
  doc["noise"] = {{"level", c.noise.level}, {"window", c.noise.window}};
  doc["sweep"] = json::object();
  for (const auto& [axis, values] : c.sweep) doc["sweep"][axis] = values;
  return doc;
}

void require_fields(const ScenarioConfig& c, RunMode mode) {
  const auto need = [](bool present, const std::string& field) {
    if (!present) throw ConfigError("missing field '" + field + "'");
  };
  need(c.data.u0.has_value(), "data.u0");
  const ProblemKind p = c.problem;
  if (mode == RunMode::forward || p == ProblemKind::forward) {
    if (mode != RunMode::forward && mode != RunMode::check) {
      throw ConfigError("field 'problem' must name an inverse problem (1, 2 or 3) for this command");
    }
    need(c.data.nu1.has_value(), "data.nu1");
    return;
  }
  const std::size_t weights = p == ProblemKind::two_measurements ? 2 : 1;
  need(c.data.omega.size() >= weights, weights == 2 ? "data.omega[1]" : "data.omega[0]");
  if (p != ProblemKind::boundary_flux) need(c.data.h.has_value(), "data.h");
  if (p == ProblemKind::source_amplitude) need(c.data.nu1.has_value(), "data.nu1");
  const bool synthesize = mode == RunMode::twin || (mode == RunMode::check && c.data.phi.size() < weights);
  if (synthesize) {
    if (p != ProblemKind::boundary_flux) need(c.truth.F.has_value(), "truth.F");
    if (p != ProblemKind::source_amplitude) need(c.truth.nu1.has_value(), "truth.nu1");
  } else {
    need(c.data.phi.size() >= weights, weights == 2 ? "data.phi[1]" : "data.phi[0]");
  }
}

SpaceProfile sample_profile(const ScenarioConfig& c, const DataRef& ref, const Grid& g, const std::string& field) {
  if (ref.is_file()) {
    const Curve cv = load_curve(c, ref, field);
    return SpaceProfile::sample(g, [&](double x) { return interpolate(cv.xs, cv.ys, x, field); });
  }
  const Expression e = expression_of(c, ref, field);
  if (e.uses_t()) throw ConfigError("field '" + field + "' must not depend on t");
  return SpaceProfile::sample(g, [&](double x) { return e(0.0, x); });
}

TimeSeries sample_series(const ScenarioConfig& c, const DataRef& ref, const Grid& g, const std::string& field) {
  if (ref.is_file()) {
    const Curve cv = load_curve(c, ref, field);
    return TimeSeries::sample(g, [&](double t) { return interpolate(cv.xs, cv.ys, t, field); });
  }
  const Expression e = expression_of(c, ref, field);
  if (e.uses_x()) throw ConfigError("field '" + field + "' must not depend on x");
  return TimeSeries::sample(g, [&](double t) { return e(t, 0.0); });
}

Field sample_field(const ScenarioConfig& c, const DataRef& ref, const Grid& g, const std::string& field) {
  if (!ref.is_file()) {
    const Expression e = expression_of(c, ref, field);
    return Field::sample(g, [&](double t, double x) { return e(t, x); });
  }
  std::set<double> ts, xs;
  std::map<std::pair<double, double>, double> values;
  for (const auto& row : read_csv(file_of(c, ref), field)) {
    if (row.size() != 3) throw ConfigError("field '" + field + "': expected rows 't,x,value'");
    ts.insert(row[0]);
    xs.insert(row[1]);
    values[{row[0], row[1]}] = row[2];
  }
  if (values.size() != ts.size() * xs.size()) {
    throw ConfigError("field '" + field + "': samples must cover a tensor grid in (t, x)");
  }
  const std::vector<double> tv(ts.begin(), ts.end());
  const std::vector<double> xv(xs.begin(), xs.end());
  std::vector<double> row_values(xv.size());
  std::vector<std::vector<double>> rows(tv.size());
  for (std::size_t n = 0; n < tv.size(); ++n) {
    for (std::size_t i = 0; i < xv.size(); ++i) row_values[i] = values.at({tv[n], xv[i]});
    rows[n] = row_values;
  }
  return Field::sample(g, [&](double t, double x) {
    std::vector<double> at_x(tv.size());
    for (std::size_t n = 0; n < tv.size(); ++n) at_x[n] = interpolate(xv, rows[n], x, field);
    return interpolate(tv, at_x, t, field);
  });
}

}  // namespace kdvinv::harness
