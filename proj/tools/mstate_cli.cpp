#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mstate/config.hpp"
#include "mstate/errors.hpp"
#include "mstate/scenarios.hpp"

namespace {

void print_report(const mstate::RunReport& r) {
  std::cout << r.scenario << '\n';
  for (const auto& e : r.experiments) {
    std::cout << "  " << e.name << ": " << mstate::to_string(e.verdict);
    if (!e.reason.empty()) std::cout << " (" << e.reason << ")";
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multichannel propagation and Mourre estimate experiments"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List the built-in scenarios");
  bool list_json = false;
  list->add_flag("--json", list_json, "Print the catalog as JSON");

  auto* run = app.add_subcommand("run", "Run one or more scenarios");
  std::vector<std::string> names;
  std::vector<std::string> sets;
  std::string out_dir;
  std::string config_file;
  int workers = 0;
  bool print_json = false;
  run->add_option("scenario", names, "Scenario names ('all' runs the whole registry)");
  run->add_option("--set", sets, "Override a config value, key.path=value")->take_all();
  run->add_option("--out", out_dir, "Directory for reports and plot data");
  run->add_option("--config", config_file, "JSON file {\"scenario\": name, \"overrides\": {path: value}}");
  run->add_option("--workers", workers, "Worker threads (default: MSTATE_WORKERS or all cores)");
  run->add_flag("--json", print_json, "Print the full reports as JSON");

  auto* validate = app.add_subcommand("validate", "Validate a problem spec or scenario config file");
  std::string validate_file;
  validate->add_option("config", validate_file, "JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      const auto catalog = mstate::list_scenarios();
      if (list_json) {
        std::cout << catalog.dump(2) << '\n';
      } else {
        for (const auto& s : catalog) {
          std::cout << s["name"].get<std::string>() << "\n    " << s["anchor"].get<std::string>() << '\n';
        }
      }
      return 0;
    }
    if (validate->parsed()) {
      std::cout << mstate::validate_config(mstate::read_json_file(validate_file)).dump(2) << '\n';
      return 0;
    }
    mstate::Overrides overrides;
    if (!config_file.empty()) {
      const auto cfg = mstate::read_json_file(config_file);
      mstate::validate_config(cfg);
      names.push_back(cfg.at("scenario").get<std::string>());
      if (cfg.contains("overrides")) {
        for (const auto& [path, value] : cfg["overrides"].items()) overrides.emplace_back(path, value.dump());
      }
    }
    for (const auto& o : mstate::parse_overrides(sets)) overrides.push_back(o);
    if (names.size() == 1 && names[0] == "all") {
      names.clear();
      for (const auto& s : mstate::scenario_registry()) names.push_back(s.name);
    }
    if (names.empty()) throw mstate::Error(mstate::ErrorCode::UnknownScenario, "no scenario given");
    const auto reports = mstate::run_scenarios(names, overrides, out_dir, workers);
    bool ok = true;
    nlohmann::json all = nlohmann::json::array();
    for (const auto& r : reports) {
      ok = ok && r.all_passed();
      if (print_json) {
        all.push_back(r.to_json());
      } else {
        print_report(r);
      }
    }
    if (print_json) std::cout << all.dump(2) << '\n';
    return ok ? 0 : 1;
  } catch (const mstate::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
