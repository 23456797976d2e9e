#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlab/hitsolver.hpp"
#include "dlab/transitivity.hpp"

namespace dlab::lab {

using nlohmann::json;

// Config problem tied to a field; what() reads "<source>:<line>: <path>: <message>".
class ConfigError : public Error {
 public:
  ConfigError(const std::string& where, const std::string& path, const std::string& message)
      : Error(where + ": " + (path.empty() ? std::string() : path + ": ") + message) {}
};

class LabConfig;

// Read access to one JSON object with diagnostics that name the field.
class Fields {
 public:
  Fields(const LabConfig& cfg, const json& node, std::string path) : cfg_(&cfg), node_(&node), path_(std::move(path)) {}

  const json& node() const { return *node_; }
  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return node_->is_object() && node_->contains(key); }
  Fields child(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key) const;
  int integer(const std::string& key, int fallback) const;
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  cplx complex(const std::string& key) const;
  std::vector<cplx> complex_list(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;
  // [[index, re, im?], ...] on the config window.
  ComplexVector vector(const std::string& key) const;
  // {"center": vector, "radius": r}
  Ball ball(const std::string& key) const;
  std::vector<Ball> balls(const std::string& key) const;
  const OperatorSpec& op(const std::string& key) const;
  std::vector<OperatorSpec> ops(const std::string& key) const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  const json& get(const std::string& key) const;
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const LabConfig* cfg_;
  const json* node_;
  std::string path_;
};

class LabConfig {
 public:
  // Parses `text`; overrides are "dotted.key=value" with value read as JSON
  // when it parses, else as a string.
  LabConfig(std::string text, std::string source, const std::vector<std::string>& overrides = {});

  static LabConfig load(const std::string& path, const std::vector<std::string>& overrides = {});

  const json& doc() const { return doc_; }
  const IndexWindow& window() const { return window_; }
  const std::string& experiment() const { return experiment_; }
  Fields parameters() const { return Fields(*this, params_node(), "parameters"); }
  const std::string& json_path() const { return json_path_; }
  const std::string& csv_path() const { return csv_path_; }
  const std::map<std::string, OperatorSpec>& operators() const { return operators_; }
  const OperatorSpec& op(const std::string& name, const std::string& field) const;

  // "<source>:<line>" for a dotted field path (best effort).
  std::string where(const std::string& path) const;

 private:
  const json& params_node() const;
  void resolve_operators();
  OperatorSpec build_operator(const std::string& name, std::vector<std::string>& stack);

  std::string text_;
  std::string source_;
  std::vector<std::string> overridden_;
  json doc_;
  IndexWindow window_ = IndexWindow::bilateral(64);
  std::string experiment_;
  std::string json_path_;
  std::string csv_path_;
  std::map<std::string, OperatorSpec> operators_;
};

cplx parse_complex(const json& j);

}  // namespace dlab::lab
