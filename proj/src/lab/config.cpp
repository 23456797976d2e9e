#include "lab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dlab::lab {

namespace {

const char* type_name(const json& j) { return j.type_name(); }

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : path) {
    if (ch == '.' || ch == '[') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
      if (ch == '[') break;  // array positions are not located
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void apply_override(json& doc, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override", spec, "expected key=value");
  const std::string key = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &doc;
  std::stringstream ss(key);
  std::string seg;
  std::vector<std::string> segs;
  while (std::getline(ss, seg, '.')) segs.push_back(seg);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].empty()) throw ConfigError("override", key, "empty key segment");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override", key, "'" + segs[i - 1] + "' is not an object");
      *node = json::object();
    }
    node = &(*node)[segs[i]];
  }
  *node = std::move(value);
}

}  // namespace

cplx parse_complex(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw std::invalid_argument("expected a number or [re, im]");
}

LabConfig::LabConfig(std::string text, std::string source, const std::vector<std::string>& overrides)
    : text_(std::move(text)), source_(std::move(source)) {
  try {
    doc_ = json::parse(text_);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text_.size());
    const auto line = 1 + std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ConfigError(source_ + ":" + std::to_string(line), "", "malformed JSON");
  }
  if (!doc_.is_object()) throw ConfigError(source_ + ":1", "", "top level must be an object");
  for (const auto& o : overrides) {
    apply_override(doc_, o);
    overridden_.push_back(o.substr(0, o.find('=')));
  }

  Fields top(*this, doc_, "");
  if (top.has("window")) {
    Fields w = top.child("window");
    const std::string kind = w.string("kind", "bilateral");
    const int m = w.integer("M", 64);
    if (m < 1) w.fail("M", "must be at least 1");
    if (kind == "bilateral") {
      window_ = IndexWindow::bilateral(m);
    } else if (kind == "unilateral") {
      window_ = IndexWindow::unilateral(m);
    } else {
      w.fail("kind", "expected 'bilateral' or 'unilateral', got '" + kind + "'");
    }
  }
  experiment_ = top.string("experiment");
  static const std::vector<std::string> known = {"orbit", "hit", "junction", "cross", "detect", "criterion", "scenario"};
  if (std::find(known.begin(), known.end(), experiment_) == known.end()) {
    top.fail("experiment", "unknown experiment '" + experiment_ + "'");
  }
  if (top.has("output")) {
    Fields out = top.child("output");
    json_path_ = out.string("json_path", "");
    csv_path_ = out.string("csv_path", "");
  }
  if (top.has("parameters") && !doc_["parameters"].is_object()) top.fail("parameters", "expected an object");
  resolve_operators();
}

LabConfig LabConfig::load(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "", "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return LabConfig(ss.str(), path, overrides);
}

const json& LabConfig::params_node() const {
  static const json empty = json::object();
  return doc_.contains("parameters") ? doc_["parameters"] : empty;
}

std::string LabConfig::where(const std::string& path) const {
  for (const auto& o : overridden_) {
    if (path == o || path.rfind(o + ".", 0) == 0 || o.rfind(path + ".", 0) == 0) return "override " + o;
  }
  std::size_t pos = 0;
  for (const auto& seg : split_path(path)) {
    const auto hit = text_.find("\"" + seg + "\"", pos);
    if (hit == std::string::npos) break;
    pos = hit;
  }
  const auto line = 1 + std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n');
  return source_ + ":" + std::to_string(line);
}

const OperatorSpec& LabConfig::op(const std::string& name, const std::string& field) const {
  const auto it = operators_.find(name);
  if (it == operators_.end()) throw ConfigError(where(field), field, "unknown operator '" + name + "'");
  return it->second;
}

void LabConfig::resolve_operators() {
  if (!doc_.contains("operators")) return;
  if (!doc_["operators"].is_object()) Fields(*this, doc_, "").fail("operators", "expected an object");
  for (const auto& [name, _] : doc_["operators"].items()) {
    std::vector<std::string> stack;
    build_operator(name, stack);
  }
}

OperatorSpec LabConfig::build_operator(const std::string& name, std::vector<std::string>& stack) {
  if (auto it = operators_.find(name); it != operators_.end()) return it->second;
  const std::string path = "operators." + name;
  if (std::find(stack.begin(), stack.end(), name) != stack.end()) {
    throw ConfigError(where(path), path, "operator definitions form a cycle");
  }
  stack.push_back(name);
  Fields f(*this, doc_["operators"][name], path);
  if (!f.node().is_object()) Fields(*this, doc_["operators"], "operators").fail(name, "expected an object");
  const std::string type = f.string("type");

  auto reference = [&](const json& ref, const std::string& field) {
    if (!ref.is_string()) f.fail(field, "expected an operator name");
    const std::string target = ref.get<std::string>();
    if (!doc_["operators"].contains(target)) f.fail(field, "unknown operator '" + target + "'");
    return build_operator(target, stack);
  };
  auto weights = [&]() {
    WeightProfile w;
    if (f.has("weight")) {
      w = WeightProfile::constant(f.number("weight"));
    } else {
      w = WeightProfile::two_sided(f.number("pos"), f.number("neg"));
    }
    if (f.has("table")) {
      w.table_start = f.integer("table_start", 0);
      for (cplx c : f.complex_list("table")) w.table.push_back(c.real());
    }
    try {
      w.validate();
    } catch (const Error& e) {
      f.fail("weight", e.what());
    }
    return w;
  };

  std::optional<OperatorSpec> built;
  try {
    if (type == "forward_shift") {
      built = OperatorSpec(ForwardShift{weights()});
    } else if (type == "backward_shift") {
      built = OperatorSpec(BackwardShift{weights()});
    } else if (type == "diagonal") {
      built = diagonal(f.complex_list("entries"));
    } else if (type == "scalar") {
      built = scalar(f.complex("c"));
    } else if (type == "dense") {
      const int dim = f.integer("dim");
      if (dim < 1) f.fail("dim", "must be at least 1");
      const json& rows = f.node().contains("data") ? f.node()["data"] : json();
      if (!rows.is_array() || rows.size() != static_cast<std::size_t>(dim)) f.fail("data", "expected dim rows");
      Dense d{static_cast<std::size_t>(dim), {}};
      for (const auto& row : rows) {
        if (!row.is_array() || row.size() != static_cast<std::size_t>(dim)) f.fail("data", "expected dim columns per row");
        for (const auto& v : row) {
          try {
            d.data.push_back(parse_complex(v));
          } catch (const std::invalid_argument& e) {
            f.fail("data", e.what());
          }
        }
      }
      built = OperatorSpec(std::move(d));
    } else if (type == "direct_sum") {
      const json& of = f.node().contains("of") ? f.node()["of"] : json();
      if (!of.is_array() || of.empty()) f.fail("of", "expected a nonempty list of operator names");
      std::vector<OperatorSpec> parts;
      for (const auto& ref : of) parts.push_back(reference(ref, "of"));
      built = direct_sum(std::move(parts));
    } else if (type == "right_inverse") {
      built = right_inverse(reference(f.node().contains("of") ? f.node()["of"] : json(), "of"));
    } else {
      f.fail("type", "unknown operator type '" + type + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where(path), path, e.what());
  }
  stack.pop_back();
  operators_.emplace(name, *built);
  return *built;
}

// Fields

[[noreturn]] void Fields::fail(const std::string& key, const std::string& message) const {
  throw ConfigError(cfg_->where(join(key)), join(key), message);
}

const json& Fields::get(const std::string& key) const {
  if (!has(key)) fail(key, "missing required field");
  return (*node_)[key];
}

Fields Fields::child(const std::string& key) const {
  const json& j = get(key);
  if (!j.is_object()) fail(key, std::string("expected an object, got ") + type_name(j));
  return Fields(*cfg_, j, join(key));
}

double Fields::number(const std::string& key) const {
  const json& j = get(key);
  if (!j.is_number()) fail(key, std::string("expected a number, got ") + type_name(j));
  return j.get<double>();
}

double Fields::number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

int Fields::integer(const std::string& key) const {
  const json& j = get(key);
  if (!j.is_number_integer()) fail(key, std::string("expected an integer, got ") + type_name(j));
  return j.get<int>();
}

int Fields::integer(const std::string& key, int fallback) const { return has(key) ? integer(key) : fallback; }

std::uint64_t Fields::seed(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const json& j = get(key);
  if (!j.is_number_unsigned()) fail(key, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

bool Fields::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const json& j = get(key);
  if (!j.is_boolean()) fail(key, std::string("expected true or false, got ") + type_name(j));
  return j.get<bool>();
}

std::string Fields::string(const std::string& key) const {
  const json& j = get(key);
  if (!j.is_string()) fail(key, std::string("expected a string, got ") + type_name(j));
  return j.get<std::string>();
}

std::string Fields::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

cplx Fields::complex(const std::string& key) const {
  try {
    return parse_complex(get(key));
  } catch (const std::invalid_argument& e) {
    fail(key, e.what());
  }
}

std::vector<cplx> Fields::complex_list(const std::string& key) const {
  const json& j = get(key);
  if (!j.is_array()) fail(key, "expected a list");
  std::vector<cplx> out;
  for (const auto& v : j) {
    try {
      out.push_back(parse_complex(v));
    } catch (const std::invalid_argument& e) {
      fail(key, e.what());
    }
  }
  return out;
}

std::vector<int> Fields::int_list(const std::string& key) const {
  const json& j = get(key);
  if (!j.is_array()) fail(key, "expected a list of integers");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) fail(key, "expected a list of integers");
    out.push_back(v.get<int>());
  }
  return out;
}

ComplexVector Fields::vector(const std::string& key) const {
  const json& j = get(key);
  if (!j.is_array()) fail(key, "expected [[index, re, im], ...]");
  ComplexVector v(cfg_->window());
  for (const auto& e : j) {
    if (!e.is_array() || e.size() < 2 || e.size() > 3 || !e[0].is_number_integer()) {
      fail(key, "entries must be [index, re] or [index, re, im]");
    }
    for (std::size_t t = 1; t < e.size(); ++t) {
      if (!e[t].is_number()) fail(key, "coefficients must be numbers");
    }
    const int index = e[0].get<int>();
    if (!cfg_->window().contains(index)) fail(key, "index " + std::to_string(index) + " lies outside the window");
    v[index] += cplx(e[1].get<double>(), e.size() == 3 ? e[2].get<double>() : 0.0);
  }
  return v;
}

Ball Fields::ball(const std::string& key) const {
  Fields b = child(key);
  const double r = b.number("radius");
  if (!(r > 0.0)) b.fail("radius", "must be positive");
  return Ball(b.vector("center"), r);
}

std::vector<Ball> Fields::balls(const std::string& key) const {
  const json& j = get(key);
  if (!j.is_array() || j.empty()) fail(key, "expected a nonempty list of balls");
  std::vector<Ball> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_object()) fail(key, "expected {center, radius} objects");
    Fields b(*cfg_, j[i], join(key) + "[" + std::to_string(i) + "]");
    const double r = b.number("radius");
    if (!(r > 0.0)) b.fail("radius", "must be positive");
    out.emplace_back(b.vector("center"), r);
  }
  return out;
}

const OperatorSpec& Fields::op(const std::string& key) const { return cfg_->op(string(key), join(key)); }

std::vector<OperatorSpec> Fields::ops(const std::string& key) const {
  const json& j = get(key);
  if (j.is_string()) return {op(key)};
  if (!j.is_array() || j.empty()) fail(key, "expected an operator name or a list of names");
  std::vector<OperatorSpec> out;
  for (const auto& name : j) {
    if (!name.is_string()) fail(key, "expected operator names");
    out.push_back(cfg_->op(name.get<std::string>(), join(key)));
  }
  return out;
}

}  // namespace dlab::lab
