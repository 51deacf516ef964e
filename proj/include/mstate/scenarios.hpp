#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace mstate {

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);

/// Column-oriented numeric table written as CSV by emit_plotdata.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  nlohmann::json to_json() const;
};

struct ExperimentResult {
  std::string name;
  std::string kind;  // mourre, decay, thresholds, graf, ...
  Verdict verdict = Verdict::Inconclusive;
  std::string reason;
  nlohmann::json data = nlohmann::json::object();
  std::map<std::string, Table> tables;
  std::map<std::string, std::string> artifacts;  // label -> path

  nlohmann::json to_json() const;
};

struct RunReport {
  std::string scenario;
  std::vector<ExperimentResult> experiments;
  nlohmann::json environment = nlohmann::json::object();
  std::map<std::string, std::string> artifacts;

  bool all_passed() const;
  const ExperimentResult* find(const std::string& experiment) const;
  nlohmann::json to_json() const;
};

/// Runs the experiments; artifact_dir is empty when nothing should be written.
using ScenarioRunner =
    std::function<std::vector<ExperimentResult>(const nlohmann::json& config, const std::string& artifact_dir)>;

struct Scenario {
  std::string name;
  std::string anchor;  // statement of the result being exercised
  std::string summary;
  nlohmann::json config;  // defaults; "spec" (if present) is a ProblemSpec document
  std::vector<std::string> experiments;
  ScenarioRunner run;
};

/// Built-in scenarios in registry order. Every embedded spec is validated on
/// first access.
const std::vector<Scenario>& scenario_registry();
const Scenario& find_scenario(const std::string& name);

/// name, anchor, summary and experiment list per scenario.
nlohmann::json list_scenarios();

/// Dotted key paths into the scenario config, e.g. "grid.N" or
/// "times.stop". Values are parsed as JSON when possible, else kept as
/// strings. Throws OverridePathInvalid for paths that do not exist.
using Overrides = std::vector<std::pair<std::string, std::string>>;
void apply_override(nlohmann::json& config, const std::string& path, const std::string& value);
Overrides parse_overrides(const std::vector<std::string>& assignments);

/// Runs every experiment of the scenario. With a non-empty out_dir the report
/// and plot data are written to out_dir/<name>/.
RunReport run_scenario(const std::string& name, const Overrides& overrides = {}, const std::string& out_dir = "");

/// Runs several scenarios on a worker pool. workers <= 0 reads MSTATE_WORKERS
/// (default: hardware concurrency).
std::vector<RunReport> run_scenarios(const std::vector<std::string>& names, const Overrides& overrides,
                                     const std::string& out_dir, int workers = 0);

/// Per-experiment CSV files plus manifest.json in dir. Returns the manifest.
/// Throws IoFailure.
nlohmann::json emit_plotdata(const RunReport& report, const std::string& dir);

/// Checks a config file: either a ProblemSpec document or
/// {"scenario": name, "overrides": {path: value}}. Returns a summary; throws
/// on the first problem.
nlohmann::json validate_config(const nlohmann::json& config);

}  // namespace mstate
