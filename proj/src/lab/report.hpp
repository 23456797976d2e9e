#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "dlab/criteria.hpp"
#include "lab/config.hpp"

namespace dlab::lab {

using Cell = std::variant<long long, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  bool empty() const { return columns.empty(); }
};

// Shortest round-trip formatting; identical values give identical bytes.
std::string format_double(double v);
std::string to_csv(const Table& t);

// Everything an experiment produces; written once at the end of a run.
struct RunOutput {
  std::string verdict;  // confirmed_up_to_horizon, refuted_with_certificate, inconclusive, pass, fail, ...
  int exit_code = 0;
  json result = json::object();
  Table main;
  std::map<std::string, Table> curves;  // <csv stem>.<name>.csv
};

json to_json(const ComplexVector& v);
json to_json(const ProductVector& v);
json to_json(cplx c);
json to_json(const JunctionReport& r);
json to_json(const CriterionReport& r);

Table junction_table(const JunctionReport& r, std::size_t arity);
Table criterion_table(const CriterionReport& r);

// Report document: tool, version, timestamp, config echo, verdict, result.
json report_document(const LabConfig& cfg, const RunOutput& out, const std::string& timestamp);

// Writes the JSON report and CSV files named in the config.
void write_outputs(const LabConfig& cfg, const RunOutput& out, const std::string& timestamp);

}  // namespace dlab::lab
