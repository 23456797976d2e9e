#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "lab/config.hpp"
#include "lab/run.hpp"
#include "lab/scenarios.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("lab-test-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Proc {
  int code;
  std::string out;
  std::string err;
};

// Runs the lab binary on a config file; outputs land in the scratch dir.
Proc run_lab(const fs::path& config, const std::string& extra = "") {
  const fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  const std::string cmd = std::string("\"") + LAB_EXE + "\" \"" + config.string() + "\" " + extra + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

fs::path write_config(const std::string& name, const json& doc) {
  const fs::path p = scratch() / (name + ".json");
  std::ofstream(p) << doc.dump(2);
  return p;
}

json base_config(const std::string& name, const std::string& experiment, json params) {
  return {{"window", {{"kind", "bilateral"}, {"M", 64}}},
          {"operators",
           {{"T", {{"type", "forward_shift"}, {"pos", 2.0}, {"neg", 3.0}}},
            {"S2", {{"type", "scalar"}, {"c", 2.0}}},
            {"half", {{"type", "scalar"}, {"c", 0.5}}}}},
          {"experiment", experiment},
          {"parameters", std::move(params)},
          {"output",
           {{"json_path", (scratch() / (name + ".out.json")).string()},
            {"csv_path", (scratch() / (name + ".out.csv")).string()}}}};
}

json e0_ball(double r) { return {{"center", json::array({json::array({0, 1.0})})}, {"radius", r}}; }

}  // namespace

TEST_CASE("cli basics") {
  const auto cfg = write_config("list", base_config("list", "orbit", {{"operator", "T"}, {"x", {{0, 1.0}}}}));
  const auto listed = run_lab(cfg, "--list-scenarios");
  CHECK(listed.code == 0);
  for (const auto& id : dlab::lab::scenario_ids()) CHECK(listed.out.find(id) != std::string::npos);
  const auto version = run_lab(cfg, "--version");
  CHECK(version.code == 0);
  CHECK(version.out.find("lab ") != std::string::npos);
  const auto orbit = run_lab(cfg);
  CHECK(orbit.code == 0);
  CHECK(fs::exists(scratch() / "list.out.csv"));
  CHECK(fs::exists(scratch() / "list.out.points.csv"));
}

TEST_CASE("config errors exit 1 and name the field") {
  SUBCASE("unknown operator name") {
    const auto cfg = write_config(
        "unknown_op", base_config("unknown_op", "junction",
                                  {{"components", {"T", "nope"}}, {"sources", {e0_ball(0.5), e0_ball(0.5)}},
                                   {"targets", {e0_ball(0.5), e0_ball(0.5)}}}));
    const auto r = run_lab(cfg);
    CHECK(r.code == 1);
    CHECK(r.err.find("parameters.components") != std::string::npos);
    CHECK(r.err.find("nope") != std::string::npos);
  }
  SUBCASE("unknown operator type") {
    auto doc = base_config("bad_type", "orbit", {{"operator", "T"}, {"x", {{0, 1.0}}}});
    doc["operators"]["T"]["type"] = "rotation";
    const auto r = run_lab(write_config("bad_type", doc));
    CHECK(r.code == 1);
    CHECK(r.err.find("operators.T.type") != std::string::npos);
  }
  SUBCASE("dangling right inverse") {
    auto doc = base_config("dangling", "orbit", {{"operator", "B"}, {"x", {{0, 1.0}}}});
    doc["operators"]["B"] = {{"type", "right_inverse"}, {"of", "missing"}};
    const auto r = run_lab(write_config("dangling", doc));
    CHECK(r.code == 1);
    CHECK(r.err.find("operators.B.of") != std::string::npos);
  }
  SUBCASE("malformed json reports a line") {
    const fs::path p = scratch() / "broken.json";
    std::ofstream(p) << "{\n  \"window\": {\"kind\": \"bilateral\", \"M\": 8},\n  \"experiment\": orbit\n}\n";
    const auto r = run_lab(p);
    CHECK(r.code == 1);
    CHECK(r.err.find("broken.json:3:") != std::string::npos);
  }
  SUBCASE("bad value in a known field") {
    const auto cfg = write_config(
        "neg_n", base_config("neg_n", "hit",
                             {{"components", {"T"}}, {"n", -2}, {"sources", {e0_ball(0.5)}}, {"targets", {e0_ball(0.5)}}}));
    const auto r = run_lab(cfg);
    CHECK(r.code == 1);
    CHECK(r.err.find("parameters.n") != std::string::npos);
  }
  SUBCASE("missing config file") {
    CHECK(run_lab(scratch() / "does-not-exist.json").code == 1);
  }
}

TEST_CASE("field diagnostics carry the source line") {
  const std::string text =
      "{\n"
      "  \"window\": {\"kind\": \"bilateral\", \"M\": 8},\n"
      "  \"experiment\": \"orbit\",\n"
      "  \"operators\": {\n"
      "    \"T\": {\"type\": \"forward_shift\", \"weight\": -1}\n"
      "  }\n"
      "}\n";
  try {
    dlab::lab::LabConfig cfg(text, "inline.json");
    FAIL("expected a config error");
  } catch (const dlab::lab::ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("inline.json:5") != std::string::npos);
    CHECK(what.find("operators.T") != std::string::npos);
  }
  CHECK_THROWS_AS(dlab::lab::LabConfig("{\"experiment\": \"dance\"}", "x.json"), dlab::lab::ConfigError);
}

TEST_CASE("exit codes follow the verdict") {
  const json hit_params = {{"components", {"S2"}}, {"n", 1}, {"sources", {e0_ball(0.1)}}, {"targets", {e0_ball(0.1)}}};
  auto hit = run_lab(write_config("hit", base_config("hit", "hit", hit_params)));
  CHECK(hit.code == 0);
  auto doc = json::parse(slurp(scratch() / "hit.out.json"));
  CHECK(doc["verdict"] == "hit");
  CHECK(doc["exit_code"] == 0);

  json miss_params = {{"components", {"half"}}, {"n", 20}, {"mode", "fixed"},
                      {"sources", {e0_ball(0.1)}}, {"targets", {e0_ball(0.01)}}};
  auto miss = run_lab(write_config("miss", base_config("miss", "hit", miss_params)));
  CHECK(miss.code == 2);
  CHECK(json::parse(slurp(scratch() / "miss.out.json"))["exit_code"] == 2);

  // The same miss with n overridden back to 0 is a hit.
  auto over = run_lab(scratch() / "miss.json", "--override parameters.n=0");
  CHECK(over.code == 0);

  const json junction = {{"kind", "mixing"}, {"components", {"T"}}, {"horizon", 30},
                         {"sources", {e0_ball(0.5)}}, {"targets", {e0_ball(0.5)}}};
  CHECK(run_lab(write_config("mixing", base_config("mixing", "junction", junction))).code == 2);
  auto compound = junction;
  compound["kind"] = "compound";
  CHECK(run_lab(write_config("compound", base_config("compound", "junction", compound))).code == 0);
  const auto csv = slurp(scratch() / "compound.out.csv");
  CHECK(csv.rfind("n,status,abs_alpha_1,residual", 0) == 0);

  const json crit = {{"check", "prop176"}, {"components", {"T"}}, {"horizon", 40}, {"samples", 5}};
  CHECK(run_lab(write_config("crit", base_config("crit", "criterion", crit))).code == 0);
  CHECK(slurp(scratch() / "crit.out.csv").rfind("n_k,cond1,cond2,cond3", 0) == 0);
  auto crit_fail = crit;
  crit_fail["components"] = {"S2"};
  crit_fail["smaps"] = {"half"};
  CHECK(run_lab(write_config("crit_fail", base_config("crit_fail", "criterion", crit_fail))).code == 2);
}

TEST_CASE("identical seeds give identical outputs") {
  const json params = {{"kind", "compound"}, {"components", {"T"}}, {"trials", 4}, {"horizon", 24}, {"seed", 5}};
  const auto cfg = write_config("det", base_config("det", "detect", params));
  REQUIRE(run_lab(cfg).code == 0);
  const auto csv1 = slurp(scratch() / "det.out.csv");
  const auto trial1 = slurp(scratch() / "det.out.trial0.csv");
  auto json1 = json::parse(slurp(scratch() / "det.out.json"));
  REQUIRE(run_lab(cfg).code == 0);
  CHECK(slurp(scratch() / "det.out.csv") == csv1);
  CHECK(slurp(scratch() / "det.out.trial0.csv") == trial1);
  auto json2 = json::parse(slurp(scratch() / "det.out.json"));
  json1.erase("timestamp");
  json2.erase("timestamp");
  CHECK(json1 == json2);
  CHECK(json1["config"]["parameters"]["seed"] == 5);
  CHECK(json1.contains("version"));

  // A different seed changes the sampled balls.
  REQUIRE(run_lab(cfg, "--override parameters.seed=6").code == 0);
  CHECK(slurp(scratch() / "det.out.trial0.csv") != trial1);
}

TEST_CASE("scenario exit codes match their reports") {
  for (const auto& id : dlab::lab::scenario_ids()) {
    if (id == "prop126-equivalence") continue;  // covered by the acceptance run
    CAPTURE(id);
    const auto cfg = write_config("scn-" + id, base_config("scn-" + id, "scenario", {{"id", id}}));
    const auto r = run_lab(cfg);
    const auto doc = json::parse(slurp(scratch() / ("scn-" + id + ".out.json")));
    CHECK(r.code == doc["exit_code"].get<int>());
    const std::string verdict = doc["verdict"];
    CHECK(r.code == (verdict == "pass" ? 0 : verdict == "fail" ? 2 : 3));
    if (id == "example-compound-not-mixing") {
      CHECK(r.code == 0);
      CHECK(doc["result"]["compound"] == "confirmed_up_to_horizon");
      CHECK(doc["result"]["mixing"] == "refuted_with_certificate");
    }
    if (id == "gs-diagonal") CHECK(doc["result"]["r"] == 9);
  }
}
