#include "kdvinv/harness/report.hpp"

#include <cstdio>
#include <fstream>

#include "kdvinv/errors.hpp"

namespace kdvinv::harness {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return num(v.get<double>());
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  }
  return v.dump();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

json to_json(const PreconditionReport& r) {
  json compat = json::array();
  for (const auto& c : r.compat) {
    compat.push_back({{"quantity", c.quantity},
                      {"order", c.order},
                      {"residual", c.residual},
                      {"tolerance", c.tolerance},
                      {"ok", c.ok}});
  }
  json omega_ok = json::array();
  for (bool b : r.omega_ok) omega_ok.push_back(b);
  return {{"problem_id", r.problem_id},
          {"omega_ok", omega_ok},
          {"omega_defects", r.omega_defects},
          {"compat_residuals", compat},
          {"delta_min", r.delta_min ? json(*r.delta_min) : json()},
          {"delta_kind", r.delta_kind},
          {"delta_floor", r.delta_floor},
          {"smallness_value", r.smallness_value},
          {"smallness_kind", r.smallness_kind},
          {"weight_derivatives_from_stencils", r.weight_derivatives_from_stencils},
          {"failures", r.failures},
          {"warnings", r.warnings},
          {"hard_ok", r.hard_ok()},
          {"all_ok", r.all_ok()}};
}

json to_json(const TimeSeries& s) {
  const Grid& g = s.grid();
  return {{"t0", 0.0}, {"dt", g.dt()}, {"M", g.M}, {"values", std::vector<double>(s.values().begin(), s.values().end())}};
}

json to_json(const Table& t) {
  json rows = json::array();
  for (const auto& r : t.rows) rows.push_back(r);
  return {{"columns", t.columns}, {"rows", rows}};
}

json to_json(const InverseResult& r, const Grid& grid) {
  return {{"converged", r.converged},
          {"grid", {{"R", grid.R}, {"T", grid.T}, {"N", grid.N}, {"M", grid.M}}},
          {"outer_residuals", r.outer_residuals},
          {"inner_iterations", r.inner_iters},
          {"inner_residuals", r.inner_residuals},
          {"contraction_gamma", r.contraction_gamma},
          {"measurement_residual", r.measurement_residual},
          {"trace_residual", r.trace_residual},
          {"F", r.F ? to_json(*r.F) : json()},
          {"nu1", r.nu1 ? to_json(*r.nu1) : json()}};
}

std::string summary_text(const RunArtifact& a) {
  json s = a.summary;
  if (!s.contains("kind")) s["kind"] = a.kind;
  if (!s.contains("tables")) s["tables"] = json::object();
  return s.dump(2) + "\n";
}

void emit_report(const RunArtifact& a, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  write_file(dir / "summary.json", summary_text(a));

  std::string series = "t,series,value\n";
  for (const auto& s : a.series) {
    for (std::size_t n = 0; n < s.values.size(); ++n) {
      series += num(s.values.coordinate(n)) + "," + s.name + "," + num(s.values[n]) + "\n";
    }
  }
  write_file(dir / "series.csv", series);

  for (const auto& [name, table] : a.tables) {
    std::string text;
    for (std::size_t i = 0; i < table.columns.size(); ++i) text += (i ? "," : "") + table.columns[i];
    text += "\n";
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + csv_cell(row[i]);
      text += "\n";
    }
    write_file(dir / ("table_" + name + ".csv"), text);
  }

  for (const auto& f : a.fields) {
    const Grid& g = f.values.grid();
    std::string text = "t,x,value\n";
    int last = -1;
    for (int q = 0; q <= 4; ++q) {
      const int n = g.M * q / 4;
      if (n == last) continue;
      last = n;
      for (int i = 0; i <= g.N; ++i) text += num(g.t(n)) + "," + num(g.x(i)) + "," + num(f.values(n, i)) + "\n";
    }
    write_file(dir / ("field_" + f.name + ".csv"), text);
  }

  json timings = json::object();
  for (const auto& [k, v] : a.timings) timings[k] = v;
  write_file(dir / "timings.json", timings.dump(2) + "\n");
}

}  // namespace kdvinv::harness
