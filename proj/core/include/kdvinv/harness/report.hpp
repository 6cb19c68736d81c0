#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kdvinv/inverse_solvers.hpp"
#include "kdvinv/mesh.hpp"
#include "kdvinv/observation.hpp"

namespace kdvinv::harness {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

struct NamedSeries {
  std::string name;
  TimeSeries values;
};

struct NamedField {
  std::string name;
  Field values;
};

// Everything a run produces. `summary` holds only deterministic content;
// wall-clock timings live apart so reruns stay byte-identical.
struct RunArtifact {
  std::string kind;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<NamedSeries> series;
  std::vector<NamedField> fields;
  std::vector<std::pair<std::string, Table>> tables;
  std::vector<std::pair<std::string, double>> timings;
  int exit_code = 0;
};

nlohmann::json to_json(const PreconditionReport& r);
nlohmann::json to_json(const TimeSeries& s);
nlohmann::json to_json(const Table& t);
// Diagnostics of an inverse solve; controls are carried as sample arrays
// with grid metadata.
nlohmann::json to_json(const InverseResult& r, const Grid& grid);

// Writes summary.json, series.csv (columns t,series,value), one
// table_<name>.csv per table, one field_<name>.csv per field snapshot
// (columns t,x,value at five time levels) and timings.json.
// Throws IoError when the directory cannot be written.
void emit_report(const RunArtifact& a, const std::filesystem::path& dir);

// summary.json as written by emit_report.
std::string summary_text(const RunArtifact& a);

}  // namespace kdvinv::harness
