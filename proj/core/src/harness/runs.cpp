#include "kdvinv/harness/runs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <random>

#include "kdvinv/calculus.hpp"
#include "kdvinv/forward_solver.hpp"
#include "kdvinv/inverse_solvers.hpp"

#ifndef KDVINV_VERSION
#define KDVINV_VERSION "unknown"
#endif

namespace kdvinv::harness {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const PreconditionError*>(&e)) return "PreconditionError";
  if (dynamic_cast<const NondegeneracyError*>(&e)) return "NondegeneracyError";
  if (dynamic_cast<const NoContraction*>(&e)) return "NoContraction";
  if (dynamic_cast<const DivergedSolution*>(&e)) return "DivergedSolution";
  if (dynamic_cast<const SingularSystem*>(&e)) return "SingularSystem";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const IoError*>(&e)) return "IoError";
  return "Error";
}

json error_json(const std::exception& e) {
  json j = {{"type", error_type(e)}, {"message", e.what()}};
  if (const auto* p = dynamic_cast<const PreconditionError*>(&e)) {
    j["hypothesis"] = p->hypothesis();
  } else if (dynamic_cast<const NondegeneracyError*>(&e)) {
    j["hypothesis"] = hypothesis::nondegeneracy;
  }
  return j;
}

void record_error(RunArtifact& a, const std::exception& e) {
  a.summary["status"] = "error";
  a.summary["error"] = error_json(e);
  a.exit_code = exit_code_for(e);
  a.summary["exit_code"] = a.exit_code;
}

RunArtifact start(const std::string& kind, const ScenarioConfig& c) {
  RunArtifact a;
  a.kind = kind;
  a.summary["kind"] = kind;
  a.summary["version"] = KDVINV_VERSION;
  a.summary["problem"] = problem_name(c.problem);
  a.summary["config"] = to_json(c);
  a.summary["status"] = "ok";
  a.summary["exit_code"] = 0;
  return a;
}

json grid_json(const Grid& g) { return {{"R", g.R}, {"T", g.T}, {"N", g.N}, {"M", g.M}}; }

InverseOptions inverse_options(const ScenarioConfig& c) {
  InverseOptions o;
  o.tol = c.solver.tol;
  o.max_outer = c.solver.max_outer;
  o.inner.tol = c.solver.inner_tol;
  o.inner.max_iter = c.solver.inner_max_iter;
  o.inner.gamma = c.solver.gamma;
  o.inner.delta_floor = c.solver.delta_floor;
  o.precondition.delta_floor = c.solver.delta_floor;
  o.precondition.compat_tol_factor = c.solver.compat_tol_factor;
  o.precondition.compat_tol_override = c.solver.compat_tol;
  return o;
}

// Field sampled without the unknown controls; problem 3 and the forward
// problem carry the known amplitude F of h.
bool carries_known_amplitude(ProblemKind p) { return p == ProblemKind::forward || p == ProblemKind::boundary_flux; }

TimeSeries subsample(const TimeSeries& fine, const Grid& coarse) {
  const std::size_t ratio = (fine.size() - 1) / static_cast<std::size_t>(coarse.M);
  std::vector<double> v(coarse.time_points());
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = fine[n * ratio];
  return TimeSeries(coarse, std::move(v));
}

struct ControlError {
  double abs_l2 = 0.0;
  std::optional<double> rel_l2;
  double sup = 0.0;
};

ControlError control_error(const TimeSeries& got, const TimeSeries& truth) {
  ControlError e;
  const TimeSeries d = got - truth;
  e.abs_l2 = l2_norm(d);
  const double ref = l2_norm(truth);
  if (ref > 0.0) e.rel_l2 = e.abs_l2 / ref;
  e.sup = d.max_abs();
  return e;
}

json error_entry(const ControlError& e) {
  return {{"abs_l2", e.abs_l2}, {"rel_l2", e.rel_l2 ? json(*e.rel_l2) : json()}, {"sup", e.sup}};
}

void add_inverse_outputs(RunArtifact& a, const Scenario& s, const InverseResult& r, ProblemKind p) {
  a.summary["result"] = to_json(r, s.grid);
  if (r.F) a.series.push_back({"F", *r.F});
  if (r.nu1) a.series.push_back({"nu1", *r.nu1});
  const std::size_t count = p == ProblemKind::two_measurements ? 2 : 1;
  for (std::size_t j = 0; j < count; ++j) {
    const std::string id = std::to_string(p == ProblemKind::two_measurements ? j + 1 : j);
    a.series.push_back({"phi_" + id, s.measurements[j]});
    a.series.push_back({"q_" + id, q_of(r.u, s.weights[j])});
  }
  a.fields.push_back({"u", r.u});
}

// Runs the inverse solver on a prepared scenario; the artifact already
// holds the config echo.
std::optional<InverseResult> invert(RunArtifact& a, const ScenarioConfig& c, const Scenario& s) {
  const InverseOptions opts = inverse_options(c);
  const PreconditionReport rep = check_preconditions(s, c.problem, opts.precondition);
  a.summary["preconditions"] = to_json(rep);
  const auto t0 = Clock::now();
  try {
    InverseResult r = solve_inverse(c.problem, s, opts);
    a.timings.emplace_back("inverse_solve", seconds_since(t0));
    add_inverse_outputs(a, s, r, c.problem);
    return r;
  } catch (const Error& e) {
    a.timings.emplace_back("inverse_solve", seconds_since(t0));
    record_error(a, e);
    return std::nullopt;
  }
}

void require_inverse_problem(const ScenarioConfig& c) {
  if (c.problem == ProblemKind::forward) {
    throw ConfigError("field 'problem' must name an inverse problem (1, 2 or 3) for this command");
  }
}

double max_error(const Field& u, const ScenarioConfig& c, const DataRef& exact) {
  return (u - sample_field(c, exact, u.grid(), "truth.u")).max_abs();
}

Solution forward_solve(const ScenarioConfig& c, const Scenario& s) {
  const LinearProblem lp = s.linear_problem(*s.nu1, s.known_source(), s.f1);
  return solve_nonlinear(lp, s.g, c.solver.forward_tol, c.solver.forward_max_iter);
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return exit_config;
  if (dynamic_cast<const PreconditionError*>(&e) || dynamic_cast<const NondegeneracyError*>(&e)) {
    return exit_precondition;
  }
  if (dynamic_cast<const NoContraction*>(&e)) return exit_no_contraction;
  return exit_other;
}

Scenario build_scenario(const ScenarioConfig& c, const Grid& g) {
  Scenario s = Scenario::zero(g, c.physics.b, c.physics.k);
  s.g = c.physics.nonlinearity.build();
  if (!c.data.u0) throw ConfigError("missing field 'data.u0'");
  s.u0 = sample_profile(c, *c.data.u0, g, "data.u0");
  if (c.data.mu0) s.mu0 = sample_series(c, *c.data.mu0, g, "data.mu0");
  if (c.data.nu0) s.nu0 = sample_series(c, *c.data.nu0, g, "data.nu0");
  if (c.data.nu1) s.nu1 = sample_series(c, *c.data.nu1, g, "data.nu1");
  if (c.data.h0) s.h0 = sample_field(c, *c.data.h0, g, "data.h0");
  if (c.data.h) s.h = sample_field(c, *c.data.h, g, "data.h");
  if (c.data.f1) s.f1 = sample_field(c, *c.data.f1, g, "data.f1");
  if (carries_known_amplitude(c.problem)) {
    if (c.data.F) {
      s.F = sample_series(c, *c.data.F, g, "data.F");
    } else if (c.problem == ProblemKind::boundary_flux && c.truth.F) {
      s.F = sample_series(c, *c.truth.F, g, "truth.F");
    }
  }
  for (std::size_t j = 0; j < c.data.omega.size(); ++j) {
    const std::string name = "data.omega[" + std::to_string(j) + "]";
    s.weights.push_back(Weight::from_profile(sample_profile(c, c.data.omega[j], g, name), c.physics.b));
  }
  for (std::size_t j = 0; j < c.data.phi.size(); ++j) {
    s.measurements.push_back(sample_series(c, c.data.phi[j], g, "data.phi[" + std::to_string(j) + "]"));
  }
  if (c.problem == ProblemKind::two_measurements) s.nu1.reset();
  return s;
}

Synthesis synthesize(const ScenarioConfig& c, int refine) {
  if (refine < 2) throw ConfigError("measurement synthesis needs a grid at least twice as fine");
  Synthesis out;
  out.grid = c.make_grid();
  const Grid fine = c.make_grid(refine);
  Scenario t = build_scenario(c, fine);
  if (c.problem != ProblemKind::boundary_flux) t.F = sample_series(c, *c.truth.F, fine, "truth.F");
  if (c.problem != ProblemKind::source_amplitude) t.nu1 = sample_series(c, *c.truth.nu1, fine, "truth.nu1");
  if (t.F && !t.h) throw ConfigError("missing field 'data.h'");
  out.u = forward_solve(c, t).u;
  for (const Weight& w : t.weights) out.measurements.push_back(subsample(q_of(out.u, w), out.grid));
  out.truth = std::move(t);
  return out;
}

TimeSeries perturb(const TimeSeries& phi, double level, int window, std::uint64_t seed) {
  TimeSeries out = phi;
  if (level > 0.0) {
    std::mt19937_64 gen(seed);
    const double scale = level * phi.max_abs();
    for (std::size_t n = 0; n < out.size(); ++n) {
      const double u = static_cast<double>(gen() >> 11) * 0x1p-53;
      out[n] += scale * (2.0 * u - 1.0);
    }
  }
  if (window > 1) {
    const TimeSeries noisy = out;
    const int half = window / 2;
    const int last = static_cast<int>(out.size()) - 1;
    for (int n = 0; n <= last; ++n) {
      // Symmetric window, shrunk near the ends.
      const int w = std::min({half, n, last - n});
      double sum = 0.0;
      for (int i = n - w; i <= n + w; ++i) sum += noisy[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(n)] = sum / (2 * w + 1);
    }
  }
  return out;
}

RunArtifact run_forward(const ScenarioConfig& c) {
  require_fields(c, RunMode::forward);
  ScenarioConfig fc = c;
  fc.problem = ProblemKind::forward;
  RunArtifact a = start("forward", fc);
  const Grid g = c.make_grid();
  const Scenario s = build_scenario(fc, g);
  a.summary["grid"] = grid_json(g);
  a.summary["preconditions"] = to_json(check_preconditions(s, ProblemKind::forward, inverse_options(c).precondition));
  const auto t0 = Clock::now();
  try {
    const Solution sol = forward_solve(fc, s);
    a.timings.emplace_back("forward_solve", seconds_since(t0));
    const Field& u = sol.u;
    const Field f1_total = s.g.is_zero() ? s.f1 : s.f1 - map(u, [&](double v) { return s.g(0, v); });
    const LinearProblem lp = s.linear_problem(*s.nu1, s.known_source(), f1_total);
    const SolveDiagnostics& d = sol.diagnostics;
    a.summary["result"] = {{"converged", d.converged},
                           {"picard_iterations", d.picard_iters},
                           {"picard_residuals", d.picard_residuals},
                           {"trace_error_left", d.trace_error_left},
                           {"trace_error_right", d.trace_error_right},
                           {"flux_error", d.flux_error},
                           {"weak_residual", weak_residual(u, lp, 8)},
                           {"max_abs", u.max_abs()}};
    a.series.push_back({"u_left", u.column(0)});
    a.series.push_back({"u_right", u.column(g.N)});
    std::vector<double> flux(g.time_points());
    for (int n = 0; n <= g.M; ++n) flux[n] = derivative_at_right(u.row_profile(n), 1);
    a.series.push_back({"ux_right", TimeSeries(g, std::move(flux))});
    a.fields.push_back({"u", u});

    if (c.truth.u) {
      const double err = max_error(u, fc, *c.truth.u);
      a.summary["result"]["max_error"] = err;
      Table conv{{"N", "M", "max_error", "order"}, {}};
      std::vector<std::pair<int, int>> levels;
      for (int div : {4, 2}) {
        if (g.N % div == 0 && g.M % div == 0 && g.N / div >= 8 && g.M / div >= 4) levels.emplace_back(g.N / div, g.M / div);
      }
      double prev = 0.0;
      int prev_n = 0;
      const auto add_row = [&](int n, int m, double e) {
        json order = prev_n > 0 && e > 0.0 ? json(std::log(prev / e) / std::log(static_cast<double>(n) / prev_n)) : json();
        conv.rows.push_back({n, m, e, order});
        prev = e;
        prev_n = n;
      };
      for (const auto& [n, m] : levels) {
        ScenarioConfig lc = fc;
        lc.grid = {n, m};
        const Scenario ls = build_scenario(lc, lc.make_grid());
        add_row(n, m, max_error(forward_solve(lc, ls).u, lc, *c.truth.u));
      }
      add_row(g.N, g.M, err);
      a.summary["tables"]["convergence"] = to_json(conv);
      a.tables.emplace_back("convergence", std::move(conv));
    }
  } catch (const Error& e) {
    a.timings.emplace_back("forward_solve", seconds_since(t0));
    record_error(a, e);
  }
  return a;
}

RunArtifact run_inverse(const ScenarioConfig& c) {
  require_inverse_problem(c);
  require_fields(c, RunMode::inverse);
  RunArtifact a = start("inverse", c);
  const Grid g = c.make_grid();
  a.summary["grid"] = grid_json(g);
  invert(a, c, build_scenario(c, g));
  return a;
}

RunArtifact run_twin(const ScenarioConfig& c, std::uint64_t seed) {
  require_inverse_problem(c);
  require_fields(c, RunMode::twin);
  constexpr int refine = 2;
  RunArtifact a = start("twin", c);
  a.summary["seed"] = seed;
  const Grid g = c.make_grid();
  a.summary["grid"] = grid_json(g);
  a.summary["synthesis_grid"] = grid_json(c.make_grid(refine));
  a.summary["synthesis_refinement"] = refine;

  const auto t0 = Clock::now();
  Synthesis syn;
  try {
    syn = synthesize(c, refine);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    a.timings.emplace_back("synthesis", seconds_since(t0));
    record_error(a, e);
    a.summary["error"]["stage"] = "synthesis";
    return a;
  }
  a.timings.emplace_back("synthesis", seconds_since(t0));

  Scenario s = build_scenario(c, g);
  s.measurements.clear();
  for (std::size_t j = 0; j < syn.measurements.size(); ++j) {
    s.measurements.push_back(perturb(syn.measurements[j], c.noise.level, c.noise.window, seed + j));
  }
  double deviation = 0.0;
  for (std::size_t j = 0; j < syn.measurements.size(); ++j) {
    deviation = std::max(deviation, (s.measurements[j] - syn.measurements[j]).max_abs());
  }
  a.summary["noise"] = {{"level", c.noise.level}, {"window", c.noise.window}, {"max_perturbation", deviation}};
  const std::optional<InverseResult> r = invert(a, c, s);

  Table errors{{"control", "abs_l2", "rel_l2", "sup"}, {}};
  json ej = json::object();
  const auto compare = [&](const char* name, const std::optional<TimeSeries>& got, const DataRef& ref) {
    const TimeSeries truth = sample_series(c, ref, g, std::string("truth.") + name);
    a.series.push_back({std::string(name) + "_true", truth});
    if (!got) return;
    const ControlError e = control_error(*got, truth);
    ej[name] = error_entry(e);
    errors.rows.push_back({name, e.abs_l2, e.rel_l2 ? json(*e.rel_l2) : json(), e.sup});
  };
  if (c.problem != ProblemKind::boundary_flux) compare("F", r ? r->F : std::nullopt, *c.truth.F);
  if (c.problem != ProblemKind::source_amplitude) compare("nu1", r ? r->nu1 : std::nullopt, *c.truth.nu1);
  a.summary["errors"] = ej;
  a.summary["tables"]["errors"] = to_json(errors);
  a.tables.emplace_back("errors", std::move(errors));
  return a;
}

RunArtifact run_check(const ScenarioConfig& c) {
  require_fields(c, RunMode::check);
  RunArtifact a = start("check", c);
  const Grid g = c.make_grid();
  a.summary["grid"] = grid_json(g);
  Scenario s = build_scenario(c, g);
  const std::size_t count = c.problem == ProblemKind::two_measurements ? 2 : c.problem == ProblemKind::forward ? 0 : 1;
  if (s.measurements.size() < count) {
    a.summary["measurements"] = "synthesized";
    try {
      s.measurements = synthesize(c).measurements;
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      record_error(a, e);
      return a;
    }
  } else if (count > 0) {
    a.summary["measurements"] = "given";
  }
  const PreconditionReport rep = check_preconditions(s, c.problem, inverse_options(c).precondition);
  a.summary["preconditions"] = to_json(rep);
  if (!rep.all_ok()) {
    a.exit_code = exit_precondition;
    a.summary["status"] = rep.hard_ok() ? "warnings" : "failed";
    a.summary["exit_code"] = a.exit_code;
  }
  return a;
}

SweepAxis parse_axis(const std::string& s) {
  if (s == "T") return SweepAxis::T;
  if (s == "amplitude") return SweepAxis::amplitude;
  if (s == "grid") return SweepAxis::grid;
  if (s == "gamma") return SweepAxis::gamma;
  throw ConfigError("sweep axis must be T, amplitude, grid or gamma, got '" + s + "'");
}

std::string axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::T:
      return "T";
    case SweepAxis::amplitude:
      return "amplitude";
    case SweepAxis::grid:
      return "grid";
    case SweepAxis::gamma:
      return "gamma";
  }
  return "";
}

RunArtifact run_sweep(const ScenarioConfig& c, SweepAxis axis, const std::vector<double>& values, std::uint64_t seed) {
  if (values.empty()) throw ConfigError("sweep over '" + axis_name(axis) + "' needs at least one value");
  if (axis == SweepAxis::amplitude && !c.parameters.count("A")) {
    throw ConfigError("sweep axis 'amplitude' needs field 'parameters.A'");
  }
  const bool forward = c.problem == ProblemKind::forward;
  const bool twin = !forward && (c.truth.F || c.truth.nu1);
  const std::string base = forward ? "forward" : twin ? "twin" : "inverse";
  require_fields(c, forward ? RunMode::forward : twin ? RunMode::twin : RunMode::inverse);

  RunArtifact a = start("sweep", c);
  a.summary["axis"] = axis_name(axis);
  a.summary["values"] = values;
  a.summary["base"] = base;
  a.summary["seed"] = seed;

  const auto run_one = [c, axis, forward, twin, seed](double value) -> RunArtifact {
    ScenarioConfig rc = c;
    switch (axis) {
      case SweepAxis::T:
        rc.physics.T = value;
        break;
      case SweepAxis::amplitude:
        rc.parameters["A"] = value;
        break;
      case SweepAxis::grid: {
        const int n = static_cast<int>(std::lround(value));
        rc.grid.M = std::max(1, static_cast<int>(std::lround(static_cast<double>(c.grid.M) * n / c.grid.N)));
        rc.grid.N = n;
        break;
      }
      case SweepAxis::gamma:
        rc.solver.gamma = value;
        break;
    }
    try {
      return forward ? run_forward(rc) : twin ? run_twin(rc, seed) : run_inverse(rc);
    } catch (const Error& e) {
      RunArtifact failed = start("row", rc);
      record_error(failed, e);
      return failed;
    }
  };
  const auto t0 = Clock::now();
  std::vector<std::future<RunArtifact>> jobs;
  for (double v : values) jobs.push_back(std::async(std::launch::async, run_one, v));
  std::vector<RunArtifact> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  a.timings.emplace_back("sweep", seconds_since(t0));

  std::vector<std::string> controls;
  if (forward) {
    if (c.truth.u) controls.push_back("u");
  } else if (twin) {
    if (c.problem != ProblemKind::boundary_flux) controls.push_back("F");
    if (c.problem != ProblemKind::source_amplitude) controls.push_back("nu1");
  }
  Table t{{"value", "status", "converged", "outer_iterations", "final_residual"}, {}};
  for (const auto& name : controls) {
    t.columns.push_back("error_" + name);
    if (axis == SweepAxis::grid) t.columns.push_back("order_" + name);
  }
  t.columns.push_back("message");

  std::vector<double> prev_err(controls.size(), 0.0);
  double prev_value = 0.0;
  int transitions = 0;
  std::optional<bool> prev_conv;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json& s = rows[i].summary;
    const bool ok = s.value("status", "") == "ok";
    const json& res = s.contains("result") ? s.at("result") : json::object();
    const bool converged = ok && res.value("converged", false);
    int iters = 0;
    json final_res;
    if (res.contains("outer_residuals") && !res.at("outer_residuals").empty()) {
      iters = static_cast<int>(res.at("outer_residuals").size());
      final_res = res.at("outer_residuals").back();
    } else if (res.contains("picard_residuals")) {
      iters = res.value("picard_iterations", 0);
      if (!res.at("picard_residuals").empty()) final_res = res.at("picard_residuals").back();
    }
    std::vector<json> row{values[i], s.value("status", ""), converged, iters, final_res};
    for (std::size_t k = 0; k < controls.size(); ++k) {
      json err;
      if (controls[k] == "u") {
        if (res.contains("max_error")) err = res.at("max_error");
      } else if (ok && s.contains("errors") && s.at("errors").contains(controls[k])) {
        const json& e = s.at("errors").at(controls[k]);
        err = e.at("rel_l2").is_null() ? e.at("abs_l2") : e.at("rel_l2");
      }
      row.push_back(err);
      if (axis == SweepAxis::grid) {
        json order;
        if (i > 0 && err.is_number() && prev_err[k] > 0.0 && err.get<double>() > 0.0) {
          order = std::log(prev_err[k] / err.get<double>()) / std::log(values[i] / prev_value);
        }
        row.push_back(order);
        prev_err[k] = err.is_number() ? err.get<double>() : 0.0;
      }
    }
    row.push_back(ok ? json("") : json(s.at("error").value("message", "")));
    t.rows.push_back(std::move(row));
    if (prev_conv && *prev_conv && !converged) ++transitions;
    prev_conv = converged;
    prev_value = values[i];
  }
  a.summary["converged_to_failed_transitions"] = transitions;
  a.summary["tables"]["sweep"] = to_json(t);
  a.tables.emplace_back("sweep", std::move(t));
  return a;
}

}  // namespace kdvinv::harness
