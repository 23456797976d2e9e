#include "lab/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace dlab::lab {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (const auto* n = std::get_if<long long>(&row[i])) {
        out += std::to_string(*n);
      } else if (const auto* d = std::get_if<double>(&row[i])) {
        out += format_double(*d);
      } else {
        out += std::get<std::string>(row[i]);
      }
    }
    out += '\n';
  }
  return out;
}

json to_json(cplx c) { return json::array({c.real(), c.imag()}); }

json to_json(const ComplexVector& v) {
  json out = json::array();
  for (int j : v.support()) out.push_back(json::array({j, v[j].real(), v[j].imag()}));
  return out;
}

json to_json(const ProductVector& v) {
  json out = json::array();
  for (const auto& p : v.parts()) out.push_back(to_json(p));
  return out;
}

json to_json(const JunctionReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    json je = {{"n", e.n}, {"status", to_string(e.status)}, {"residual", e.residual}};
    if (e.status == HitStatus::Hit) {
      json alphas = json::array();
      for (cplx a : e.alphas) alphas.push_back(to_json(a));
      json origins = json::array();
      for (auto o : e.origins) origins.push_back(to_string(o));
      je["alphas"] = alphas;
      je["origins"] = origins;
      if (e.z) je["z"] = to_json(*e.z);
    }
    if (e.status == HitStatus::MissCertified) je["certified_margin"] = e.certified_margin;
    entries.push_back(std::move(je));
  }
  json out = {{"horizon", r.horizon}, {"hit_times", r.hit_times()}, {"entries", entries}};
  out["tail_start"] = r.tail_start ? json(*r.tail_start) : json();
  return out;
}

json to_json(const CriterionReport& r) {
  json conds = json::array();
  for (const auto& c : r.conditions) conds.push_back({{"pass", c.pass}, {"values", c.values}});
  json witnesses = json::array();
  for (const auto& w : r.witnesses) {
    witnesses.push_back({{"x", to_json(w.x)}, {"y", to_json(w.y)}, {"pass", w.pass}});
  }
  return {{"nk", r.nk}, {"pass", r.pass()}, {"conditions", conds}, {"witnesses", witnesses}};
}

Table junction_table(const JunctionReport& r, std::size_t arity) {
  Table t;
  t.columns = {"n", "status"};
  for (std::size_t i = 0; i < arity; ++i) t.columns.push_back("abs_alpha_" + std::to_string(i + 1));
  t.columns.push_back("residual");
  for (const auto& e : r.entries) {
    std::vector<Cell> row{static_cast<long long>(e.n), std::string(to_string(e.status))};
    for (std::size_t i = 0; i < arity; ++i) {
      row.push_back(i < e.alphas.size() ? Cell(std::abs(e.alphas[i])) : Cell(std::string()));
    }
    row.push_back(e.residual);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table criterion_table(const CriterionReport& r) {
  Table t;
  t.columns = {"n_k", "cond1", "cond2", "cond3"};
  for (std::size_t k = 0; k < r.nk.size(); ++k) {
    t.rows.push_back({static_cast<long long>(r.nk[k]), r.conditions[0].values[k], r.conditions[1].values[k],
                      r.conditions[2].values[k]});
  }
  return t;
}

json report_document(const LabConfig& cfg, const RunOutput& out, const std::string& timestamp) {
  return {{"tool", "lab"},
          {"version", DLAB_VERSION},
          {"timestamp", timestamp},
          {"config", cfg.doc()},
          {"experiment", cfg.experiment()},
          {"verdict", out.verdict},
          {"exit_code", out.exit_code},
          {"result", out.result}};
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << content;
  if (!f) throw Error("failed writing " + path);
}

}  // namespace

void write_outputs(const LabConfig& cfg, const RunOutput& out, const std::string& timestamp) {
  if (!cfg.json_path().empty()) write_file(cfg.json_path(), report_document(cfg, out, timestamp).dump(2) + "\n");
  if (cfg.csv_path().empty()) return;
  if (!out.main.empty()) write_file(cfg.csv_path(), to_csv(out.main));
  std::filesystem::path stem(cfg.csv_path());
  stem.replace_extension();
  for (const auto& [name, table] : out.curves) write_file(stem.string() + "." + name + ".csv", to_csv(table));
}

}  // namespace dlab::lab
