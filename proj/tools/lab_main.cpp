#include <iostream>

#include <CLI11.hpp>

#include "lab/run.hpp"
#include "lab/scenarios.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Disk-transitivity lab: runs one experiment described by a JSON config"};
  std::string config_path;
  std::vector<std::string> overrides;
  bool list = false;
  app.add_option("config", config_path, "experiment config (JSON)");
  app.add_option("--override", overrides, "dotted.key=value, applied after loading")->take_all();
  app.add_flag("--list-scenarios", list, "print scenario ids and exit");
  app.set_version_flag("--version", std::string("lab ") + DLAB_VERSION);
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& id : dlab::lab::scenario_ids()) std::cout << id << "\n";
    return 0;
  }
  if (config_path.empty()) {
    std::cerr << "lab: a config path is required\n";
    return 1;
  }
  try {
    const auto cfg = dlab::lab::LabConfig::load(config_path, overrides);
    return dlab::lab::run(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "lab: error: " << e.what() << "\n";
    return 1;
  }
}
